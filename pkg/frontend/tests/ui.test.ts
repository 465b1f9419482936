import { readFileSync } from "node:fs";
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { createApp, guessModality, type App } from "../src/app.js";
import { applyEvents, emptyState } from "../src/events.js";
import type { EdgeDoc, NodeDoc, PipelineDoc } from "../src/types.js";
import { mockServer, type RecordedSession } from "./mock_server.js";

const fixture: RecordedSession = JSON.parse(
  readFileSync("tests/fixtures/dubbing_session.json", "utf8"),
);
const reference = fixture.pipeline as PipelineDoc;

async function waitFor(cond: () => boolean, label: string): Promise<void> {
  for (let i = 0; i < 500; i++) {
    if (cond()) return;
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
  throw new Error(`timed out waiting for ${label}`);
}

function typeAndSend(root: HTMLElement, text: string): void {
  const input = root.querySelector<HTMLInputElement>(".composer input[type=text]")!;
  input.value = text;
  root.querySelector<HTMLFormElement>(".composer")!.dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

describe("dubbing conversation against the replayed API", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
  });

  it("runs to a completed build with the reference DAG", async () => {
    const { fetchImpl, counters } = mockServer(fixture);
    const app = createApp(root, new ApiClient("http://mock", fetchImpl));
    await app.start();

    typeAndSend(root, fixture.messages[0]!.request.text);
    await waitFor(() => app.state.messages.length >= 2, "first reply");
    expect(root.querySelectorAll(".message.assistant")).toHaveLength(1);
    expect(root.querySelector(".pending")).not.toBeNull();

    typeAndSend(root, fixture.messages[1]!.request.text);
    await waitFor(() => app.state.refinedQuery !== null, "refined query");
    const card = root.querySelector(".refined-card")!;
    expect(card.textContent).toContain(app.state.refinedQuery!);

    // two rapid clicks: the build must start exactly once
    const confirm = root.querySelector<HTMLButtonElement>("button.confirm")!;
    expect(confirm.disabled).toBe(false);
    confirm.click();
    confirm.click();
    await waitFor(() => app.state.confirmed, "confirmation");
    expect(counters.confirmCalls).toBe(1);

    await app.pollUntilDone(0);
    expect(app.state.status).toBe("done");
    expect(root.querySelector("[data-status]")!.getAttribute("data-status")).toBe("done");

    const drawnNodes = [...root.querySelectorAll("[data-node-id]")].map(
      (g) => g.getAttribute("data-node-id"),
    );
    expect(drawnNodes.sort()).toEqual(reference.nodes.map((n: NodeDoc) => n.id).sort());
    expect(drawnNodes).toHaveLength(11);

    const drawnEdges = [...root.querySelectorAll("[data-edge]")].map(
      (l) => l.getAttribute("data-edge"),
    );
    const expectedEdges = reference.edges.map((e: EdgeDoc) => `${e.from}->${e.to}`);
    expect(drawnEdges.sort()).toEqual(expectedEdges.sort());

    // confirm stays spent after completion
    expect(counters.confirmCalls).toBe(1);
    expect(root.querySelector<HTMLButtonElement>("button.confirm")!.disabled).toBe(true);
  });

  it("blocks empty sends client-side", async () => {
    const { fetchImpl, counters } = mockServer(fixture);
    const app = createApp(root, new ApiClient("http://mock", fetchImpl));
    await app.start();
    typeAndSend(root, "   ");
    await new Promise((resolve) => setTimeout(resolve, 5));
    expect(counters.messageCalls).toBe(0);
    expect(app.state.messages).toHaveLength(0);
  });

  it("surfaces API failures as a retryable banner", async () => {
    const { fetchImpl } = mockServer(fixture);
    let failures = 1;
    const flaky: typeof fetch = async (input, init) => {
      if (failures > 0 && String(input).includes("/messages")) {
        failures -= 1;
        return new Response(JSON.stringify({ detail: "backend hiccup" }), { status: 502 });
      }
      return fetchImpl(input, init);
    };
    const app = createApp(root, new ApiClient("http://mock", flaky));
    await app.start();

    typeAndSend(root, fixture.messages[0]!.request.text);
    await waitFor(() => app.banner !== null, "error banner");
    expect(root.querySelector(".banner.error")!.textContent).toContain("backend hiccup");

    root.querySelector<HTMLButtonElement>("button.retry")!.click();
    await waitFor(() => app.state.messages.length >= 2, "retry success");
    expect(app.banner).toBeNull();
    expect(root.querySelector(".banner.error")).toBeNull();
  });
});

describe("draft rendering details", () => {
  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>';
  });

  function drawState(records: Parameters<typeof applyEvents>[1]): App {
    const root = document.getElementById("app")!;
    const app = createApp(root, new ApiClient("http://mock", async () => new Response("{}")));
    app.state = applyEvents(emptyState(), records);
    app.draw();
    return app;
  }

  it("highlights the edge named by a modality finding", () => {
    const draft: PipelineDoc = {
      nodes: [
        { id: "in_video", kind: "input", params: { modality: "video" } },
        { id: "ea", kind: "function", function: "extract_audio_from_video", params: {} },
        { id: "mt", kind: "function", function: "machine_translation", params: {} },
        { id: "out_text", kind: "output", params: { modality: "text" } },
      ],
      edges: [
        { from: "in_video.video", to: "ea.video" },
        { from: "ea.audio", to: "mt.text" },
        { from: "mt.text", to: "out_text.text" },
      ],
    };
    drawState([
      { seq: 1, event: { type: "draft", iteration: 1, pipeline: draft } },
      {
        seq: 2,
        event: {
          type: "issues",
          iteration: 1,
          issues: ["MODALITY_MISMATCH at ea.audio->mt.text: audio cannot feed a text port"],
        },
      },
    ]);
    const bad = document.querySelector('[data-edge="ea.audio->mt.text"]')!;
    expect(bad.getAttribute("class")).toContain("issue");
    const fine = document.querySelector('[data-edge="in_video.video->ea.video"]')!;
    expect(fine.getAttribute("class")).not.toContain("issue");
    expect(document.querySelectorAll(".issue-badge")).toHaveLength(1);
  });

  it("lists attachments with their assigned input nodes", () => {
    drawState([
      { seq: 1, event: { type: "attachment", name: "clip.mp4", modality: "video", content_ref: "ab" } },
      { seq: 2, event: { type: "attachment", name: "notes.txt", modality: "text", content_ref: "cd" } },
      { seq: 3, event: { type: "attachment_map", map: { "clip.mp4": "in_video", "notes.txt": null } } },
    ]);
    const rows = [...document.querySelectorAll(".attachments tr")].slice(1);
    const cells = rows.map((r) => [...r.querySelectorAll("td")].map((td) => td.textContent));
    expect(cells).toEqual([
      ["clip.mp4", "video", "in_video"],
      ["notes.txt", "text", "unassigned"],
    ]);
  });

  it("keeps node kind colors addressable", () => {
    drawState(fixture.events);
    expect(document.querySelector('[data-node-id="in_video"]')!.getAttribute("class")).toContain("kind-input");
    expect(document.querySelector('[data-node-id="asr"]')!.getAttribute("class")).toContain("kind-function");
    expect(document.querySelector('[data-node-id="out_fr"]')!.getAttribute("class")).toContain("kind-output");
  });
});

describe("api client", () => {
  it("turns HTTP errors into typed failures", async () => {
    const api = new ApiClient("http://mock", async () =>
      new Response(JSON.stringify({ detail: "nothing to confirm" }), { status: 409 }),
    );
    await expect(api.confirm("x")).rejects.toMatchObject({ status: 409, detail: "nothing to confirm" });
  });

  it("maps transport failures to status 0", async () => {
    const api = new ApiClient("http://mock", async () => {
      throw new TypeError("socket closed");
    });
    const err = await api.createSession().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(0);
  });
});

describe("attachment modality guessing", () => {
  it("maps common extensions", () => {
    expect(guessModality("movie.MP4")).toBe("video");
    expect(guessModality("track.flac")).toBe("audio");
    expect(guessModality("subs.srt")).toBe("text");
    expect(guessModality("weird.xyz")).toBe("text");
  });
});
