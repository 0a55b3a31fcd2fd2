import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ScoreStream } from "../src/stream.js";
import { FakeSourceFactory } from "./fake-eventsource.js";

function recordFrame(seq: number, kind = "AlertIngested") {
  const data = JSON.stringify({
    seq,
    kind,
    committed_at: "2025-03-18T10:00:00+00:00",
    payload: {},
  });
  return { id: String(seq), event: kind, data };
}

function scoreFrame(seq: number, team = 1) {
  const data = JSON.stringify({ seq, team, effective_penalty: "0" });
  return { event: "score", data };
}

describe("ScoreStream", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  function build(options: Partial<ConstructorParameters<typeof ScoreStream>[0]> = {}) {
    const factory = new FakeSourceFactory();
    const stream = new ScoreStream({
      baseUrl: "http://svc",
      makeEventSource: factory.make,
      retryMs: 2000,
      ...options,
    });
    return { factory, stream };
  }

  it("requests full history on first connect by default", () => {
    const { factory, stream } = build();
    stream.connect();
    expect(factory.urls).toEqual(["http://svc/stream?cursor=0"]);
  });

  it("tail-follows when fromStart is off, until it has a cursor", () => {
    const { factory, stream } = build({ fromStart: false });
    stream.connect();
    expect(factory.urls).toEqual(["http://svc/stream"]);
  });

  it("carries the team filter into the URL", () => {
    const { factory, stream } = build({ team: 2 });
    stream.connect();
    expect(factory.urls).toEqual(["http://svc/stream?cursor=0&team=2"]);
  });

  it("advances the cursor from record ids, stickily across score frames", () => {
    const { factory, stream } = build();
    stream.connect();
    const source = factory.last;
    source.open();
    source.emit(recordFrame(7));
    expect(stream.cursor).toBe(7);
    source.emit(scoreFrame(7)); // no id of its own, lastEventId stays 7
    expect(stream.cursor).toBe(7);
    source.emit(recordFrame(8, "ResetApplied"));
    expect(stream.cursor).toBe(8);
  });

  it("parses and dispatches record and score frames", () => {
    const { factory, stream } = build();
    const records: number[] = [];
    const scores: number[] = [];
    stream.onRecord = (record) => records.push(record.seq);
    stream.onScore = (snapshot) => scores.push(snapshot.seq);
    stream.connect();
    factory.last.open();
    factory.last.emitAll([recordFrame(1), scoreFrame(1), recordFrame(2, "ResetApplied"), scoreFrame(2)]);
    expect(records).toEqual([1, 2]);
    expect(scores).toEqual([1, 2]);
  });

  it("reconnects after the retry delay, resuming from the cursor", () => {
    const { factory, stream } = build();
    const statuses: string[] = [];
    stream.onStatus = (status) => statuses.push(status);
    stream.connect();
    const first = factory.last;
    first.open();
    first.emitAll([recordFrame(1), scoreFrame(1), recordFrame(5)]);
    expect(stream.cursor).toBe(5);

    first.fail();
    expect(stream.status).toBe("retrying");
    expect(first.closed).toBe(true);
    expect(factory.sources).toHaveLength(1);

    vi.advanceTimersByTime(2000);
    expect(factory.sources).toHaveLength(2);
    expect(factory.last.url).toBe("http://svc/stream?cursor=5");
    factory.last.open();
    expect(stream.status).toBe("live");
    expect(statuses).toEqual(["connecting", "live", "retrying", "connecting", "live"]);
  });

  it("ignores frames from a replaced source", () => {
    const { factory, stream } = build();
    const seen: number[] = [];
    stream.onRecord = (record) => seen.push(record.seq);
    stream.connect();
    const first = factory.last;
    first.open();
    first.emit(recordFrame(1));
    first.fail();
    vi.advanceTimersByTime(2000);
    expect(factory.sources).toHaveLength(2);

    first.closed = false; // simulate an event already queued before close
    first.emit(recordFrame(99));
    expect(seen).toEqual([1]);
    expect(stream.cursor).toBe(1);
  });

  it("stops retrying once closed", () => {
    const { factory, stream } = build();
    stream.connect();
    factory.last.fail();
    stream.close();
    expect(stream.status).toBe("closed");
    vi.advanceTimersByTime(60_000);
    expect(factory.sources).toHaveLength(1);
  });
});
