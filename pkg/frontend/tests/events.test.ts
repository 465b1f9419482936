import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  applyEvents,
  awaitingAnswer,
  confirmEnabled,
  emptyState,
  parseIssue,
  pipelineToRender,
} from "../src/events.js";
import type { EventRecord } from "../src/types.js";
import type { RecordedSession } from "./mock_server.js";

const fixture: RecordedSession = JSON.parse(
  readFileSync("tests/fixtures/dubbing_session.json", "utf8"),
);

describe("event folding", () => {
  it("replaying the same page changes nothing", () => {
    const once = applyEvents(emptyState(), fixture.events);
    const twice = applyEvents(once, fixture.events);
    expect(twice).toEqual(once);
  });

  it("page-at-a-time folding equals one big fold", () => {
    let incremental = emptyState();
    for (const record of fixture.events) {
      incremental = applyEvents(incremental, [record]);
    }
    expect(incremental).toEqual(applyEvents(emptyState(), fixture.events));
  });

  it("does not mutate its input", () => {
    const before = emptyState();
    applyEvents(before, fixture.events);
    expect(before).toEqual(emptyState());
  });

  it("folds the full dubbing log into a done session", () => {
    const state = applyEvents(emptyState(), fixture.events);
    expect(state.status).toBe("done");
    expect(state.confirmed).toBe(true);
    expect(state.messages).toHaveLength(4);
    expect(state.refinedQuery).toContain("dub");
    expect(state.finalPipeline?.nodes).toHaveLength(11);
    expect(Object.keys(state.assignments).length).toBeGreaterThan(0);
  });

  it("a new draft clears stale findings", () => {
    const pipeline = { nodes: [], edges: [] };
    const records: EventRecord[] = [
      { seq: 1, event: { type: "draft", iteration: 1, pipeline } },
      { seq: 2, event: { type: "issues", iteration: 1, issues: ["MODALITY_MISMATCH at a.x->b.y: no"] } },
      { seq: 3, event: { type: "draft", iteration: 2, pipeline } },
    ];
    const afterIssues = applyEvents(emptyState(), records.slice(0, 2));
    expect(afterIssues.issues).toHaveLength(1);
    const afterRedraft = applyEvents(afterIssues, records.slice(2));
    expect(afterRedraft.issues).toHaveLength(0);
    expect(afterRedraft.draft?.iteration).toBe(2);
  });

  it("ignores event types it does not know", () => {
    const state = applyEvents(emptyState(), [
      { seq: 1, event: { type: "telemetry", blob: 7 } },
    ]);
    expect(state.lastSeq).toBe(1);
    expect(state).toEqual({ ...emptyState(), lastSeq: 1 });
  });
});

describe("derived view flags", () => {
  it("question indicator follows the conversation", () => {
    const state = applyEvents(emptyState(), [
      { seq: 1, event: { type: "user_message", text: "dub this" } },
      { seq: 2, event: { type: "assistant_message", text: "which language?" } },
    ]);
    expect(awaitingAnswer(state)).toBe(true);
    const refined = applyEvents(state, [
      { seq: 3, event: { type: "refined_query", query: "dub en video to fr" } },
    ]);
    expect(awaitingAnswer(refined)).toBe(false);
  });

  it("confirm is enabled exactly between refinement and confirmation", () => {
    let state = emptyState();
    expect(confirmEnabled(state)).toBe(false);
    state = applyEvents(state, [{ seq: 1, event: { type: "refined_query", query: "q" } }]);
    expect(confirmEnabled(state)).toBe(true);
    state = applyEvents(state, [{ seq: 2, event: { type: "confirmed" } }]);
    expect(confirmEnabled(state)).toBe(false);
  });

  it("the final pipeline wins over the last draft", () => {
    const state = applyEvents(emptyState(), fixture.events);
    expect(pipelineToRender(state)).toBe(state.finalPipeline);
  });
});

describe("issue parsing", () => {
  it("splits validator findings into code and location", () => {
    const issue = parseIssue("MODALITY_MISMATCH at ea.audio->mt.text: audio into a text port");
    expect(issue.code).toBe("MODALITY_MISMATCH");
    expect(issue.location).toBe("ea.audio->mt.text");
    expect(issue.message).toBe("audio into a text port");
  });

  it("reads semantic rejections by output", () => {
    const issue = parseIssue("output out_fr: branch drops the source language");
    expect(issue.code).toBeNull();
    expect(issue.location).toBe("out_fr");
  });

  it("keeps unrecognized text whole", () => {
    const issue = parseIssue("something very unexpected");
    expect(issue.location).toBeNull();
    expect(issue.raw).toBe("something very unexpected");
  });
});
