// Render models for the console panels: plain data the DOM layer paints.

import type { SessionViewState } from "./viewmodel.js";

export interface PlanLine {
  label: string;
  status: string;
}

export function planPanel(state: SessionViewState): PlanLine[] {
  const snapshot = state.snapshot;
  if (snapshot === null) {
    return [];
  }
  return snapshot.plan.steps.map((step) => ({
    label: `${step.index}. ${step.text}`,
    status: step.status,
  }));
}

export function rewritePanel(state: SessionViewState): string[] {
  const snapshot = state.snapshot;
  if (snapshot === null) {
    return [];
  }
  return snapshot.rewrites.map(([from, to]) => `${from} -> ${to}`);
}

export interface ChartPoint {
  label: string;
  nodes: number;
  edges: number;
}

export function kgChart(state: SessionViewState): ChartPoint[] {
  const points: ChartPoint[] = [];
  if (state.snapshot !== null) {
    points.push({
      label: "now",
      nodes: state.snapshot.kb_stats.nodes,
      edges: state.snapshot.kb_stats.edges,
    });
  }
  // one appended point per expansion event, in stream order
  const expansions = state.kgSeries.map((p) => ({
    label: `+${p.entity}`,
    nodes: p.nodes,
    edges: p.edges,
  }));
  return expansions.length > 0 ? expansions : points;
}

export function eventFeed(state: SessionViewState, limit = 50): string[] {
  return state.events.slice(-limit).map((event) => {
    const rest = Object.entries(event)
      .filter(([key]) => key !== "event" && key !== "seq")
      .map(([key, value]) => `${key}=${JSON.stringify(value)}`)
      .join(" ");
    return `#${event.seq} ${event.event}${rest ? " " + rest : ""}`;
  });
}
