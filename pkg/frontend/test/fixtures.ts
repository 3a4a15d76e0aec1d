import { readFileSync } from "node:fs";

import type { KgPayload, SessionEvent, Snapshot, AnswerPayload } from "../src/types.js";

function load<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}

export interface AnswerStep {
  answer: AnswerPayload;
  status: number;
  snapshot: Snapshot;
}

export const snapshotAwaiting = () => load<Snapshot>("snapshot_awaiting.json");
export const snapshotDone = () => load<Snapshot>("snapshot_done.json");
export const kgBefore = () => load<KgPayload>("kg_before.json");
export const kgAfter = () => load<KgPayload>("kg_after.json");
export const eventsFull = () => load<SessionEvent[]>("events_full.json");
export const answerSteps = () => load<AnswerStep[]>("answer_steps.json");
export const progressDone = () =>
  readFileSync(new URL("./fixtures/progress_done.txt", import.meta.url), "utf8");
