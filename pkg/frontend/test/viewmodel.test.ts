import { describe, expect, it } from "vitest";

import {
  applyEvent,
  emptyState,
  frozen,
  headerLine,
  seriesIsNonDecreasing,
  withSnapshot,
} from "../src/viewmodel.js";
import { eventsFull, snapshotAwaiting, snapshotDone } from "./fixtures.js";

describe("session view state over recorded payloads", () => {
  it("renders the header from the snapshot only", () => {
    const state = withSnapshot(emptyState(), snapshotAwaiting());
    const header = headerLine(state);
    expect(header).toContain("mop the countertop");
    expect(header).toContain("AwaitingHuman");
    expect(header).toContain("2/2"); // re-prompt budget spent
  });

  it("appends exactly one kg point per expansion event", () => {
    let state = emptyState();
    for (const event of eventsFull()) {
      state = applyEvent(state, event);
    }
    const expansions = eventsFull().filter((e) => e.event === "expansion_applied");
    expect(state.kgSeries.length).toBe(expansions.length);
    expect(state.kgSeries.length).toBe(1);
    expect(state.kgSeries[0]!.entity).toBe("mopping_cloth");
  });

  it("kg series is non-decreasing in nodes and edges", () => {
    let state = emptyState();
    const before = snapshotAwaiting().kb_stats;
    for (const event of eventsFull()) {
      state = applyEvent(state, event);
    }
    expect(seriesIsNonDecreasing(state.kgSeries)).toBe(true);
    expect(state.kgSeries[0]!.nodes).toBeGreaterThanOrEqual(before.nodes);
    expect(state.kgSeries[0]!.edges).toBeGreaterThanOrEqual(before.edges);
  });

  it("freezes panels once the session is terminal", () => {
    expect(frozen(withSnapshot(emptyState(), snapshotAwaiting()))).toBe(false);
    expect(frozen(withSnapshot(emptyState(), snapshotDone()))).toBe(true);
  });

  it("keeps the full ordered event feed", () => {
    let state = emptyState();
    for (const event of eventsFull()) {
      state = applyEvent(state, event);
    }
    expect(state.events.map((e) => e.seq)).toEqual(
      eventsFull().map((e) => e.seq),
    );
  });
});
