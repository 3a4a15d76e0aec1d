import { describe, expect, it } from "vitest";

import { EventStream, type MessageSource, type SourceFactory } from "../src/events.js";
import type { SessionEvent } from "../src/types.js";
import { eventsFull } from "./fixtures.js";

/** Replays the recorded server log, honouring ?after=N; can drop mid-stream. */
class ReplayServer {
  sources: FakeSource[] = [];

  constructor(
    private log: SessionEvent[],
    private dropAfter: number | null = null, // drop the connection after N messages (once)
  ) {}

  factory(): SourceFactory {
    return (url: string) => {
      const after = Number(new URL(url, "http://test").searchParams.get("after") ?? "0");
      const source = new FakeSource();
      this.sources.push(source);
      queueMicrotask(() => {
        let sent = 0;
        for (const event of this.log.slice(after)) {
          if (source.closed) return;
          if (this.dropAfter !== null && sent === this.dropAfter) {
            this.dropAfter = null;
            source.onerror?.();
            return;
          }
          source.onmessage?.({ data: JSON.stringify(event) });
          sent += 1;
        }
      });
      return source;
    };
  }
}

class FakeSource implements MessageSource {
  onmessage: ((message: { data: string }) => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;
  close(): void {
    this.closed = true;
  }
}

async function settle(): Promise<void> {
  for (let i = 0; i < 10; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

describe("event stream client", () => {
  it("delivers the full recorded log densely", async () => {
    const log = eventsFull();
    const server = new ReplayServer(log);
    const received: number[] = [];
    const stream = new EventStream(
      (after) => `/events?after=${after}&follow=true`,
      server.factory(),
      (event) => received.push(event.seq),
    );
    stream.connect();
    await settle();
    expect(received).toEqual(log.map((e) => e.seq));
    stream.close();
  });

  it("reconnects after a drop with no gaps or duplicates", async () => {
    const log = eventsFull();
    const server = new ReplayServer(log, 7);
    const received: number[] = [];
    const stream = new EventStream(
      (after) => `/events?after=${after}&follow=true`,
      server.factory(),
      (event) => received.push(event.seq),
    );
    stream.connect();
    await settle();
    expect(stream.reconnects).toBe(1);
    expect(server.sources.length).toBe(2);
    expect(received).toEqual(log.map((e) => e.seq)); // dense, complete, no dups
    stream.close();
  });

  it("treats a sequence gap as a reconnect trigger", async () => {
    const log = eventsFull();
    const holey = [log[0]!, log[4]!, ...log.slice(1)]; // out-of-order insert
    const server = new ReplayServer(holey);
    const received: number[] = [];
    const stream = new EventStream(
      (after) => `/events?after=${after}`,
      // first connection serves the holey log, reconnects serve the real one
      (url) => {
        const factory =
          stream.reconnects === 0 ? server.factory() : new ReplayServer(log).factory();
        return factory(url);
      },
      (event) => received.push(event.seq),
    );
    stream.connect();
    await settle();
    expect(stream.reconnects).toBeGreaterThanOrEqual(1);
    expect(received).toEqual(log.map((e) => e.seq));
    stream.close();
  });

  it("drops replayed duplicates after manual reconnect", async () => {
    const log = eventsFull();
    const received: number[] = [];
    const server = new ReplayServer(log);
    const stream = new EventStream(
      () => `/events?after=0`, // always replays from the start
      server.factory(),
      (event) => received.push(event.seq),
    );
    stream.connect();
    await settle();
    stream.reconnect();
    await settle();
    expect(received).toEqual(log.map((e) => e.seq));
    stream.close();
  });
});
