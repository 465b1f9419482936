/**
 * In-memory stand-in for the build service, replaying a recorded
 * session. Messages return the recorded replies in order; events are
 * gated so the build portion of the log only streams after confirm,
 * the way the real service reveals it.
 */

import type { EventRecord } from "../src/types.js";

export interface RecordedSession {
  session: { id: string; status: string };
  messages: { request: { text: string }; response: unknown }[];
  confirm: unknown;
  confirmed_seq: number;
  events: EventRecord[];
  final_status: string;
  pipeline: unknown;
}

export interface MockCounters {
  sessionCalls: number;
  messageCalls: number;
  confirmCalls: number;
  eventCalls: number;
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function mockServer(fixture: RecordedSession) {
  const counters: MockCounters = {
    sessionCalls: 0,
    messageCalls: 0,
    confirmCalls: 0,
    eventCalls: 0,
  };
  let confirmed = false;
  const sid = fixture.session.id;
  // Events become visible in lockstep with the calls that produced them
  // on the real service: everything up to (not including) the next
  // user_message is revealed after each post, the rest after confirm.
  const userSeqs = fixture.events
    .filter((r) => r.event.type === "user_message")
    .map((r) => r.seq);

  const fetchImpl = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");

    if (method === "POST" && path === "/sessions") {
      counters.sessionCalls += 1;
      return json(fixture.session, 201);
    }
    if (method === "POST" && path === `/sessions/${sid}/messages`) {
      const body = JSON.parse(String(init?.body ?? "{}"));
      if (confirmed) return json({ detail: "session takes no further messages" }, 409);
      const turn = fixture.messages[counters.messageCalls];
      counters.messageCalls += 1;
      if (!turn) return json({ detail: "transcript exhausted" }, 502);
      if (turn.request.text !== body.text) {
        return json({ detail: `unexpected message ${JSON.stringify(body.text)}` }, 502);
      }
      return json(turn.response);
    }
    if (method === "POST" && path === `/sessions/${sid}/confirm`) {
      counters.confirmCalls += 1;
      if (confirmed) return json({ detail: "session is already confirmed" }, 409);
      confirmed = true;
      return json(fixture.confirm, 202);
    }
    if (method === "GET" && path.startsWith(`/sessions/${sid}/events`)) {
      counters.eventCalls += 1;
      const since = Number(new URL(url, "http://mock").searchParams.get("since") ?? "0");
      const limit = confirmed
        ? Infinity
        : userSeqs[counters.messageCalls] ?? fixture.confirmed_seq;
      const visible = fixture.events.filter((r) => r.seq < limit);
      const page = visible.filter((r) => r.seq > since);
      const lastSeq = visible.length ? visible[visible.length - 1]!.seq : 0;
      return json({
        events: page,
        last_seq: lastSeq,
        status: confirmed ? fixture.final_status : "clarifying",
      });
    }
    if (method === "GET" && path === `/sessions/${sid}/pipeline`) {
      if (!confirmed) return json({ detail: "pipeline is not ready" }, 409);
      return json({ pipeline: fixture.pipeline });
    }
    return json({ detail: `unknown route ${method} ${path}` }, 404);
  };

  return { fetchImpl, counters };
}
