// Wire types for the build service API. Field names mirror the JSON exactly.

export interface NodeDoc {
  id: string;
  kind: string;
  function?: string;
  params: Record<string, unknown>;
  payload?: string;
}

export interface EdgeDoc {
  from: string;
  to: string;
}

export interface PipelineDoc {
  nodes: NodeDoc[];
  edges: EdgeDoc[];
  metadata?: Record<string, unknown>;
}

export interface SessionEvent {
  type: string;
  [key: string]: unknown;
}

export interface EventRecord {
  seq: number;
  event: SessionEvent;
}

export interface EventsPage {
  events: EventRecord[];
  last_seq: number;
  status: string;
}

export interface SessionOut {
  id: string;
  status: string;
}

export interface MessageReply {
  reply: string;
  refined_query: string | null;
  status: string;
}

export interface AttachmentUpload {
  name: string;
  modality: string;
  content_b64?: string;
}
