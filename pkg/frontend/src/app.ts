/** Controller: owns the session, folds event pages, re-renders on change.
 * All server state flows through the event log; the only client-side
 * extras are unsent attachments and the transient error banner. */

import { ApiClient, ApiError } from "./api.js";
import { applyEvents, emptyState, isTerminal, type ViewState } from "./events.js";
import { render, type Handlers, type PendingAttachment } from "./render.js";

function toBase64(bytes: ArrayBuffer): string {
  let binary = "";
  for (const b of new Uint8Array(bytes)) binary += String.fromCharCode(b);
  return btoa(binary);
}

const MODALITY_BY_EXT: Record<string, string> = {
  mp4: "video", mov: "video", webm: "video",
  mp3: "audio", wav: "audio", ogg: "audio", flac: "audio",
  png: "image", jpg: "image", jpeg: "image", gif: "image",
  txt: "text", srt: "text", md: "text",
};

export function guessModality(filename: string): string {
  const ext = filename.split(".").pop()?.toLowerCase() ?? "";
  return MODALITY_BY_EXT[ext] ?? "text";
}

export class App {
  state: ViewState = emptyState();
  sessionId: string | null = null;
  banner: string | null = null;
  private pending: PendingAttachment[] = [];
  private confirmRequested = false;
  private retryAction: (() => Promise<void>) | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
  ) {}

  private handlers(): Handlers {
    return {
      send: (text) => void this.send(text),
      confirm: () => void this.confirm(),
      retry: () => void this.retry(),
      editRefined: (query) => {
        const input = this.root.querySelector<HTMLInputElement>(".composer input[type=text]");
        if (input) input.value = query;
      },
      attach: (file) => void this.attach(file),
    };
  }

  draw(): void {
    render(this.root, this.state, this.pending, this.banner, this.handlers());
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    this.retryAction = action;
    try {
      await action();
      this.banner = null;
      this.retryAction = null;
    } catch (err) {
      this.banner = err instanceof ApiError ? err.message : String(err);
    }
    this.draw();
  }

  async start(): Promise<void> {
    await this.guarded(async () => {
      const session = await this.api.createSession();
      this.sessionId = session.id;
      await this.pull();
    });
  }

  async send(text: string): Promise<void> {
    if (!this.sessionId || !text.trim()) return;
    const attachments = this.pending.map(({ name, modality, content_b64 }) => ({
      name, modality, content_b64,
    }));
    await this.guarded(async () => {
      await this.api.sendMessage(this.sessionId!, text, attachments);
      this.pending = [];
      const input = this.root.querySelector<HTMLInputElement>(".composer input[type=text]");
      if (input) input.value = "";
      await this.pull();
    });
  }

  async confirm(): Promise<void> {
    // the build must start at most once, no matter how fast the clicks come
    if (!this.sessionId || this.confirmRequested || this.state.confirmed) return;
    this.confirmRequested = true;
    await this.guarded(async () => {
      try {
        await this.api.confirm(this.sessionId!);
      } catch (err) {
        this.confirmRequested = false;
        throw err;
      }
      await this.pull();
    });
  }

  async attach(file: File): Promise<void> {
    const bytes = await file.arrayBuffer();
    this.pending.push({
      name: file.name,
      modality: guessModality(file.name),
      content_b64: toBase64(bytes),
      pending: true,
    });
    this.draw();
  }

  async retry(): Promise<void> {
    const action = this.retryAction;
    this.banner = null;
    if (action) await this.guarded(action);
    else this.draw();
  }

  /** One poll step: fetch everything after lastSeq and fold it in. */
  async pull(): Promise<void> {
    if (!this.sessionId) return;
    const page = await this.api.fetchEvents(this.sessionId, this.state.lastSeq);
    this.state = applyEvents(this.state, page.events);
    this.draw();
  }

  async pollUntilDone(intervalMs = 700): Promise<void> {
    while (!isTerminal(this.state)) {
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
      try {
        await this.pull();
      } catch (err) {
        this.banner = err instanceof ApiError ? err.message : String(err);
        this.draw();
      }
    }
  }
}

export function createApp(root: HTMLElement, api: ApiClient): App {
  const app = new App(root, api);
  app.draw();
  return app;
}
