/**
 * Pure view-state reducer over the session event log.
 *
 * The server log is the only source of truth: the client never invents
 * state, it folds event pages into a ViewState. Records at or below
 * lastSeq are skipped, so replaying a page (after a reconnect, say) is
 * a no-op and the invariant "same log, same state" holds.
 */

import type { EventRecord, PipelineDoc, SessionEvent } from "./types.js";

export interface ChatMessage {
  role: "user" | "assistant";
  text: string;
}

/** One finding against the current draft, located if the text allows it. */
export interface ParsedIssue {
  code: string | null;
  location: string | null;
  message: string;
  raw: string;
}

// findings arrive as flat strings: "CODE at location: message" for
// validation, "output out_x: message" for semantic rejections
export function parseIssue(raw: string): ParsedIssue {
  const validation = /^([A-Z_]+) at ([^:]+): ([\s\S]*)$/.exec(raw);
  if (validation) {
    return {
      code: validation[1] ?? null,
      location: (validation[2] ?? "").trim() || null,
      message: validation[3] ?? "",
      raw,
    };
  }
  const semantic = /^output ([^:]+): ([\s\S]*)$/.exec(raw);
  if (semantic) {
    return { code: null, location: semantic[1] ?? null, message: semantic[2] ?? "", raw };
  }
  return { code: null, location: null, message: raw, raw };
}

export interface AttachmentRow {
  name: string;
  modality: string;
  contentRef: string;
}

export interface ViewState {
  lastSeq: number;
  status: string;
  messages: ChatMessage[];
  refinedQuery: string | null;
  confirmed: boolean;
  attachments: AttachmentRow[];
  attachmentMap: Record<string, string | null>;
  specificationRows: Record<string, unknown>[];
  draft: { iteration: number; pipeline: PipelineDoc } | null;
  issues: ParsedIssue[];
  assignments: Record<string, string>;
  finalPipeline: PipelineDoc | null;
  errorReason: string | null;
}

export function emptyState(): ViewState {
  return {
    lastSeq: 0,
    status: "clarifying",
    messages: [],
    refinedQuery: null,
    confirmed: false,
    attachments: [],
    attachmentMap: {},
    specificationRows: [],
    draft: null,
    issues: [],
    assignments: {},
    finalPipeline: null,
    errorReason: null,
  };
}

function applyOne(state: ViewState, ev: SessionEvent): void {
  switch (ev.type) {
    case "status":
      state.status = ev.status as string;
      break;
    case "user_message":
      state.messages.push({ role: "user", text: ev.text as string });
      break;
    case "assistant_message":
      state.messages.push({ role: "assistant", text: ev.text as string });
      break;
    case "refined_query":
      state.refinedQuery = ev.query as string;
      break;
    case "confirmed":
      state.confirmed = true;
      break;
    case "attachment":
      state.attachments.push({
        name: ev.name as string,
        modality: ev.modality as string,
        contentRef: ev.content_ref as string,
      });
      break;
    case "attachment_map":
      state.attachmentMap = ev.map as Record<string, string | null>;
      break;
    case "specification":
      state.specificationRows = ev.rows as Record<string, unknown>[];
      break;
    case "draft":
      // a fresh draft supersedes earlier findings
      state.draft = {
        iteration: ev.iteration as number,
        pipeline: ev.pipeline as PipelineDoc,
      };
      state.issues = [];
      break;
    case "issues":
      state.issues = (ev.issues as string[]).map(parseIssue);
      break;
    case "fixes":
      break; // applied repairs carry no view beyond the next draft
    case "model_assignments":
      state.assignments = ev.assignments as Record<string, string>;
      break;
    case "final_pipeline":
      state.finalPipeline = ev.pipeline as PipelineDoc;
      break;
    case "error":
      state.errorReason = ev.reason as string;
      break;
    default:
      break; // forward compatibility: unknown events are ignored
  }
}

/** Fold a page of event records into a new state. Input state is not touched. */
export function applyEvents(state: ViewState, records: EventRecord[]): ViewState {
  const next: ViewState = JSON.parse(JSON.stringify(state));
  for (const record of records) {
    if (record.seq <= next.lastSeq) continue;
    applyOne(next, record.event);
    next.lastSeq = record.seq;
  }
  return next;
}

/** The question indicator: the agent spoke last and no refined query yet. */
export function awaitingAnswer(state: ViewState): boolean {
  const last = state.messages[state.messages.length - 1];
  return (
    state.status === "clarifying" &&
    !state.refinedQuery &&
    last !== undefined &&
    last.role === "assistant"
  );
}

/** Confirm is offered only while a refined query sits unconfirmed. */
export function confirmEnabled(state: ViewState): boolean {
  return state.refinedQuery !== null && !state.confirmed && state.status === "clarifying";
}

/** The DAG always shows the newest structure we have. */
export function pipelineToRender(state: ViewState): PipelineDoc | null {
  return state.finalPipeline ?? state.draft?.pipeline ?? null;
}

export function isTerminal(state: ViewState): boolean {
  return state.status === "done" || state.status === "failed";
}
