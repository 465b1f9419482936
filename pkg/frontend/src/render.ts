/** DOM renderer. Rebuilds the whole view from ViewState on every pass;
 * at chat scale that is cheaper than bookkeeping a virtual tree. */

import {
  awaitingAnswer,
  confirmEnabled,
  pipelineToRender,
  type ParsedIssue,
  type ViewState,
} from "./events.js";
import { layoutPipeline, NODE_H, NODE_W } from "./layout.js";
import type { AttachmentUpload, PipelineDoc } from "./types.js";

export interface Handlers {
  send: (text: string) => void;
  confirm: () => void;
  retry: () => void;
  editRefined: (query: string) => void;
  attach: (file: File) => void;
}

export interface PendingAttachment extends AttachmentUpload {
  pending: true;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function issueTargets(issues: ParsedIssue[]): { nodes: Set<string>; edges: Set<string> } {
  const nodes = new Set<string>();
  const edges = new Set<string>();
  for (const issue of issues) {
    if (!issue.location) continue;
    if (issue.location.includes("->")) {
      edges.add(issue.location);
    } else {
      nodes.add(issue.location.split(".")[0] ?? issue.location);
    }
  }
  return { nodes, edges };
}

function renderDag(doc: PipelineDoc, issues: ParsedIssue[]): SVGSVGElement {
  const { positions, width, height } = layoutPipeline(doc);
  const marked = issueTargets(issues);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "dag");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));

  for (const e of doc.edges) {
    const a = positions.get(e.from.split(".")[0] ?? "");
    const b = positions.get(e.to.split(".")[0] ?? "");
    if (!a || !b) continue;
    const key = `${e.from}->${e.to}`;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x + NODE_W));
    line.setAttribute("y1", String(a.y + NODE_H / 2));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y + NODE_H / 2));
    line.setAttribute("class", marked.edges.has(key) ? "edge issue" : "edge");
    line.setAttribute("data-edge", key);
    svg.appendChild(line);
  }

  for (const n of doc.nodes) {
    const pos = positions.get(n.id);
    if (!pos) continue;
    const g = document.createElementNS(SVG_NS, "g");
    const classes = ["node", `kind-${n.kind}`];
    if (marked.nodes.has(n.id)) classes.push("issue");
    g.setAttribute("class", classes.join(" "));
    g.setAttribute("data-node-id", n.id);
    g.setAttribute("transform", `translate(${pos.x},${pos.y})`);
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("width", String(NODE_W));
    rect.setAttribute("height", String(NODE_H));
    rect.setAttribute("rx", "6");
    g.appendChild(rect);
    const title = document.createElementNS(SVG_NS, "text");
    title.setAttribute("x", String(NODE_W / 2));
    title.setAttribute("y", String(NODE_H / 2 - 4));
    title.setAttribute("text-anchor", "middle");
    title.textContent = n.id;
    g.appendChild(title);
    const sub = document.createElementNS(SVG_NS, "text");
    sub.setAttribute("x", String(NODE_W / 2));
    sub.setAttribute("y", String(NODE_H / 2 + 14));
    sub.setAttribute("text-anchor", "middle");
    sub.setAttribute("class", "sub");
    sub.textContent = n.function ?? n.kind;
    g.appendChild(sub);
    svg.appendChild(g);
  }
  return svg;
}

export function render(
  root: HTMLElement,
  state: ViewState,
  pending: PendingAttachment[],
  banner: string | null,
  handlers: Handlers,
): void {
  const draftText = root.querySelector<HTMLInputElement>(".composer input[type=text]")?.value ?? "";
  root.textContent = "";

  const chat = el("section", "chat");
  const header = el("header");
  const badge = el("span", `status-badge status-${state.status}`, state.status);
  badge.setAttribute("data-status", state.status);
  header.appendChild(badge);
  chat.appendChild(header);

  if (banner) {
    const box = el("div", "banner error", banner + " ");
    const retry = el("button", "retry", "Retry");
    retry.addEventListener("click", () => handlers.retry());
    box.appendChild(retry);
    chat.appendChild(box);
  }
  if (state.errorReason) {
    chat.appendChild(el("div", "banner failed", `Build failed: ${state.errorReason}`));
  }

  const log = el("ul", "messages");
  for (const m of state.messages) {
    log.appendChild(el("li", `message ${m.role}`, m.text));
  }
  chat.appendChild(log);
  if (awaitingAnswer(state)) {
    chat.appendChild(el("div", "pending", "The agent is waiting for your answer."));
  }

  if (state.refinedQuery !== null) {
    const card = el("div", "refined-card");
    card.appendChild(el("p", "refined-query", state.refinedQuery));
    const confirm = el("button", "confirm", "Confirm");
    confirm.disabled = !confirmEnabled(state);
    confirm.addEventListener("click", () => handlers.confirm());
    card.appendChild(confirm);
    const edit = el("button", "edit", "Edit");
    edit.disabled = state.confirmed;
    edit.addEventListener("click", () => handlers.editRefined(state.refinedQuery ?? ""));
    card.appendChild(edit);
    chat.appendChild(card);
  }

  const allAttachments: { name: string; modality: string; where: string }[] = [
    ...state.attachments.map((a) => ({
      name: a.name,
      modality: a.modality,
      where: state.attachmentMap[a.name] ?? "",
    })),
    ...pending.map((a) => ({ name: a.name, modality: a.modality, where: "(not sent yet)" })),
  ];
  if (allAttachments.length) {
    const table = el("table", "attachments");
    const head = el("tr");
    for (const h of ["file", "modality", "input node"]) head.appendChild(el("th", undefined, h));
    table.appendChild(head);
    for (const a of allAttachments) {
      const tr = el("tr");
      tr.appendChild(el("td", undefined, a.name));
      tr.appendChild(el("td", undefined, a.modality));
      tr.appendChild(el("td", undefined, a.where || "unassigned"));
      table.appendChild(tr);
    }
    chat.appendChild(table);
  }

  if (state.issues.length) {
    const list = el("ul", "issues");
    for (const issue of state.issues) {
      list.appendChild(el("li", "issue-badge", issue.raw));
    }
    chat.appendChild(list);
  }

  const composer = el("form", "composer");
  const input = el("input");
  input.type = "text";
  input.placeholder = "Describe the pipeline you need";
  input.value = draftText;
  const send = el("button", "send", "Send");
  send.type = "submit";
  const file = el("input", "file");
  file.type = "file";
  file.addEventListener("change", () => {
    const chosen = file.files && file.files[0];
    if (chosen) handlers.attach(chosen);
  });
  composer.addEventListener("submit", (e) => {
    e.preventDefault();
    const text = input.value.trim();
    if (!text) return; // empty sends never reach the API
    handlers.send(text);
  });
  composer.appendChild(input);
  composer.appendChild(send);
  composer.appendChild(file);
  chat.appendChild(composer);
  root.appendChild(chat);

  const side = el("section", "pipeline");
  const doc = pipelineToRender(state);
  if (doc) {
    side.appendChild(renderDag(doc, state.issues));
  } else {
    side.appendChild(el("p", "placeholder", "The pipeline appears here once drafting starts."));
  }
  root.appendChild(side);
}
