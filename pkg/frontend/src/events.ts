// Event-stream client with sequence tracking and replay on reconnect.
//
// The server numbers events densely from 1 and replays from `after` on
// reconnect, so the client never misses or duplicates an event: duplicates
// (seq <= last seen) are dropped, a forward gap forces a reconnect that
// replays from the last seen sequence number.

import type { SessionEvent } from "./types.js";

export interface StreamMessage {
  data: string;
}

export interface MessageSource {
  onmessage: ((message: StreamMessage) => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export type SourceFactory = (url: string) => MessageSource;

export class EventStream {
  lastSeq = 0;
  reconnects = 0;
  private source: MessageSource | null = null;
  private closed = false;

  constructor(
    private urlFor: (after: number) => string,
    private factory: SourceFactory,
    private onEvent: (event: SessionEvent) => void,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const source = this.factory(this.urlFor(this.lastSeq));
    source.onmessage = (message) => {
      let event: SessionEvent;
      try {
        event = JSON.parse(message.data) as SessionEvent;
      } catch {
        return; // not an event frame
      }
      if (typeof event.seq !== "number") {
        return;
      }
      if (event.seq <= this.lastSeq) {
        return; // replayed duplicate
      }
      if (event.seq !== this.lastSeq + 1) {
        this.reconnect(); // gap: re-attach and replay from lastSeq
        return;
      }
      this.lastSeq = event.seq;
      this.onEvent(event);
    };
    source.onerror = () => {
      this.reconnect();
    };
    this.source = source;
  }

  reconnect(): void {
    if (this.closed) {
      return;
    }
    this.reconnects += 1;
    this.source?.close();
    this.open();
  }

  close(): void {
    this.closed = true;
    this.source?.close();
  }
}
