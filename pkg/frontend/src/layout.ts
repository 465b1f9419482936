/**
 * Layered left-to-right layout for the pipeline DAG.
 *
 * Longest-path layering from the sources, then a barycenter pass to
 * order nodes inside each layer so edges mostly travel to a neighbour
 * row. Deterministic: ties break on node id.
 */

import type { PipelineDoc } from "./types.js";

export const NODE_W = 150;
export const NODE_H = 44;
export const GAP_X = 70;
export const GAP_Y = 26;
export const PAD = 20;

export interface Placement {
  x: number;
  y: number;
}

export interface LayoutResult {
  positions: Map<string, Placement>;
  width: number;
  height: number;
}

function nodeOf(endpoint: string): string {
  const dot = endpoint.indexOf(".");
  return dot === -1 ? endpoint : endpoint.slice(0, dot);
}

export function layoutPipeline(doc: PipelineDoc): LayoutResult {
  const ids = doc.nodes.map((n) => n.id);
  const known = new Set(ids);
  const out = new Map<string, string[]>();
  const indegree = new Map<string, number>();
  for (const id of ids) {
    out.set(id, []);
    indegree.set(id, 0);
  }
  for (const e of doc.edges) {
    const a = nodeOf(e.from);
    const b = nodeOf(e.to);
    if (!known.has(a) || !known.has(b)) continue; // dangling refs still render as nodes
    out.get(a)!.push(b);
    indegree.set(b, (indegree.get(b) ?? 0) + 1);
  }

  const layer = new Map<string, number>();
  const queue = ids.filter((id) => indegree.get(id) === 0).sort();
  for (const id of queue) layer.set(id, 0);
  const pending = new Map(indegree);
  while (queue.length) {
    const current = queue.shift()!;
    for (const next of out.get(current) ?? []) {
      const proposed = (layer.get(current) ?? 0) + 1;
      layer.set(next, Math.max(layer.get(next) ?? 0, proposed));
      pending.set(next, (pending.get(next) ?? 0) - 1);
      if (pending.get(next) === 0) queue.push(next);
    }
  }
  for (const id of ids) if (!layer.has(id)) layer.set(id, 0); // cycles or islands

  const byLayer = new Map<number, string[]>();
  for (const id of ids) {
    const l = layer.get(id) ?? 0;
    if (!byLayer.has(l)) byLayer.set(l, []);
    byLayer.get(l)!.push(id);
  }
  const layerKeys = [...byLayer.keys()].sort((a, b) => a - b);

  // order: layer 0 by id, later layers by average predecessor row
  const row = new Map<string, number>();
  const preds = new Map<string, string[]>();
  for (const id of ids) preds.set(id, []);
  for (const e of doc.edges) {
    const a = nodeOf(e.from);
    const b = nodeOf(e.to);
    if (known.has(a) && known.has(b)) preds.get(b)!.push(a);
  }
  for (const l of layerKeys) {
    const members = byLayer.get(l)!;
    if (l === layerKeys[0]) {
      members.sort();
    } else {
      const score = (id: string): number => {
        const ps = (preds.get(id) ?? []).map((p) => row.get(p) ?? 0);
        return ps.length ? ps.reduce((s, v) => s + v, 0) / ps.length : 0;
      };
      members.sort((a, b) => score(a) - score(b) || (a < b ? -1 : 1));
    }
    members.forEach((id, i) => row.set(id, i));
  }

  const positions = new Map<string, Placement>();
  let maxRow = 0;
  for (const l of layerKeys) {
    const members = byLayer.get(l)!;
    maxRow = Math.max(maxRow, members.length - 1);
    members.forEach((id, i) => {
      positions.set(id, {
        x: PAD + l * (NODE_W + GAP_X),
        y: PAD + i * (NODE_H + GAP_Y),
      });
    });
  }
  const lastLayer = layerKeys.length ? layerKeys[layerKeys.length - 1]! : 0;
  return {
    positions,
    width: PAD * 2 + lastLayer * (NODE_W + GAP_X) + NODE_W,
    height: PAD * 2 + maxRow * (NODE_H + GAP_Y) + NODE_H,
  };
}
