// Session view state: a snapshot plus the reduced event feed. Everything
// rendered comes from server payloads held here.

import type { KgPayload, SessionEvent, Snapshot } from "./types.js";
import { isTerminal } from "./types.js";

export interface KgPoint {
  seq: number;
  entity: string;
  nodes: number;
  edges: number;
}

export interface SessionViewState {
  snapshot: Snapshot | null;
  kg: KgPayload | null;
  events: SessionEvent[];
  kgSeries: KgPoint[];
  progressText: string;
  lastError: string | null;
}

export function emptyState(): SessionViewState {
  return {
    snapshot: null,
    kg: null,
    events: [],
    kgSeries: [],
    progressText: "",
    lastError: null,
  };
}

export function applyEvent(state: SessionViewState, event: SessionEvent): SessionViewState {
  const events = [...state.events, event];
  let kgSeries = state.kgSeries;
  if (event.event === "expansion_applied") {
    kgSeries = [
      ...kgSeries,
      {
        seq: event.seq,
        entity: String(event.entity),
        nodes: Number(event.nodes),
        edges: Number(event.edges),
      },
    ];
  }
  return { ...state, events, kgSeries };
}

export function withSnapshot(state: SessionViewState, snapshot: Snapshot): SessionViewState {
  return { ...state, snapshot };
}

export function withKg(state: SessionViewState, kg: KgPayload): SessionViewState {
  return { ...state, kg };
}

export function withProgress(state: SessionViewState, text: string): SessionViewState {
  return { ...state, progressText: text };
}

export function withError(state: SessionViewState, error: string | null): SessionViewState {
  return { ...state, lastError: error };
}

export function headerLine(state: SessionViewState): string {
  const snapshot = state.snapshot;
  if (snapshot === null) {
    return "connecting...";
  }
  const budget = `${snapshot.feedback_count}/${snapshot.feedback_budget}`;
  const cause = snapshot.failure_cause ? ` (${snapshot.failure_cause})` : "";
  return `${snapshot.task} — ${snapshot.configuration} — ${snapshot.phase}${cause} — re-prompts ${budget} — tokens ${snapshot.tokens_total}`;
}

export function frozen(state: SessionViewState): boolean {
  return state.snapshot !== null && isTerminal(state.snapshot.phase);
}

export function seriesIsNonDecreasing(series: KgPoint[]): boolean {
  for (let i = 1; i < series.length; i++) {
    const previous = series[i - 1]!;
    const current = series[i]!;
    if (current.nodes < previous.nodes || current.edges < previous.edges) {
      return false;
    }
  }
  return true;
}
