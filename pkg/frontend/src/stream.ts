// Reconnecting client for the service's server-sent event feed.
//
// Record frames carry `id:` = log seq; score frames carry no id but SSE
// last-event-id is sticky, so the cursor always names the last record whose
// effects we have fully applied. Reconnects ask the server to replay
// everything strictly after that cursor, which the service guarantees is
// byte-identical to the frames an uninterrupted stream would have carried.

import type { EventRecordDoc, RecordKind, ScoreSnapshot } from "./types.js";

export interface SseMessage {
  data: string;
  lastEventId: string;
}

export interface EventSourceLike {
  addEventListener(type: string, listener: (ev: SseMessage) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export type StreamStatus = "connecting" | "live" | "retrying" | "closed";

const RECORD_KINDS: RecordKind[] = [
  "AlertIngested",
  "ResetApplied",
  "ValidationFrozen",
  "ProvisionRequested",
  "ProvisionAcked",
  "LabelAssigned",
];

export interface StreamOptions {
  baseUrl: string;
  team?: number;
  // replay history from the beginning on first connect (a dashboard is
  // stateless beyond its cursor, so the full view must come from the feed)
  fromStart?: boolean;
  retryMs?: number;
  makeEventSource?: EventSourceFactory;
}

export class ScoreStream {
  cursor = 0;
  status: StreamStatus = "closed";
  lastFrameAt: number | null = null;

  onRecord: (record: EventRecordDoc) => void = () => {};
  onScore: (snapshot: ScoreSnapshot) => void = () => {};
  onStatus: (status: StreamStatus) => void = () => {};

  private readonly baseUrl: string;
  private readonly team: number | undefined;
  private readonly fromStart: boolean;
  private readonly retryMs: number;
  private readonly makeEventSource: EventSourceFactory;
  private source: EventSourceLike | null = null;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private started = false;
  private disposed = false;

  constructor(options: StreamOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.team = options.team;
    this.fromStart = options.fromStart ?? true;
    this.retryMs = options.retryMs ?? 2000;
    this.makeEventSource =
      options.makeEventSource ??
      ((url: string) => new EventSource(url) as unknown as EventSourceLike);
  }

  streamUrl(): string {
    const params = new URLSearchParams();
    if (this.started || this.fromStart) params.set("cursor", String(this.cursor));
    if (this.team !== undefined) params.set("team", String(this.team));
    const query = params.toString();
    return `${this.baseUrl}/stream${query ? "?" + query : ""}`;
  }

  connect(): void {
    if (this.disposed) return;
    this.setStatus("connecting");
    const source = this.makeEventSource(this.streamUrl());
    this.source = source;
    this.started = true;

    source.addEventListener("open", () => {
      if (this.source === source) this.setStatus("live");
    });
    source.addEventListener("error", () => {
      if (this.source === source) this.scheduleRetry();
    });
    for (const kind of RECORD_KINDS) {
      source.addEventListener(kind, (ev) => {
        if (this.source !== source) return;
        this.noteFrame(ev);
        this.onRecord(JSON.parse(ev.data) as EventRecordDoc);
      });
    }
    source.addEventListener("score", (ev) => {
      if (this.source !== source) return;
      this.noteFrame(ev);
      this.onScore(JSON.parse(ev.data) as ScoreSnapshot);
    });
  }

  close(): void {
    this.disposed = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.retryTimer = null;
    this.source?.close();
    this.source = null;
    this.setStatus("closed");
  }

  private noteFrame(ev: SseMessage): void {
    this.lastFrameAt = Date.now();
    const id = Number.parseInt(ev.lastEventId, 10);
    if (Number.isFinite(id) && id > this.cursor) this.cursor = id;
    if (this.status !== "live") this.setStatus("live");
  }

  private scheduleRetry(): void {
    this.source?.close();
    this.source = null;
    if (this.disposed || this.retryTimer !== null) return;
    this.setStatus("retrying");
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      this.connect();
    }, this.retryMs);
  }

  private setStatus(status: StreamStatus): void {
    if (this.status === status) return;
    this.status = status;
    this.onStatus(status);
  }
}
