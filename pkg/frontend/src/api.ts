import type {
  AttachmentUpload,
  EventsPage,
  MessageReply,
  PipelineDoc,
  SessionOut,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`API ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

/** Thin typed wrapper over the service endpoints. No retries here; the
 * controller decides what is worth retrying. */
export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.base + path, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, err instanceof Error ? err.message : "network failure");
    }
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const payload = await res.json();
        if (payload && typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  createSession(): Promise<SessionOut> {
    return this.request("POST", "/sessions");
  }

  sendMessage(
    sessionId: string,
    text: string,
    attachments: AttachmentUpload[] = [],
  ): Promise<MessageReply> {
    return this.request("POST", `/sessions/${sessionId}/messages`, { text, attachments });
  }

  confirm(sessionId: string): Promise<{ accepted: boolean; status: string }> {
    return this.request("POST", `/sessions/${sessionId}/confirm`);
  }

  fetchEvents(sessionId: string, since: number): Promise<EventsPage> {
    return this.request("GET", `/sessions/${sessionId}/events?since=${since}`);
  }

  fetchPipeline(sessionId: string): Promise<{ pipeline: PipelineDoc }> {
    return this.request("GET", `/sessions/${sessionId}/pipeline`);
  }
}
