import { describe, expect, it } from "vitest";

import { eventFeed, kgChart, planPanel, rewritePanel } from "../src/panels.js";
import { applyEvent, emptyState, withSnapshot } from "../src/viewmodel.js";
import { eventsFull, progressDone, snapshotAwaiting, snapshotDone } from "./fixtures.js";

describe("panels are pure projections of server payloads", () => {
  it("plan panel mirrors the snapshot's steps and statuses", () => {
    const snapshot = snapshotDone();
    const lines = planPanel(withSnapshot(emptyState(), snapshot));
    expect(lines.length).toBe(snapshot.plan.steps.length);
    lines.forEach((line, i) => {
      const step = snapshot.plan.steps[i]!;
      expect(line.label).toBe(`${step.index}. ${step.text}`);
      expect(line.status).toBe(step.status);
    });
    expect(lines.every((l) => l.status === "applied")).toBe(true);
  });

  it("rewrite panel lists snapshot rewrites verbatim", () => {
    const lines = rewritePanel(withSnapshot(emptyState(), snapshotAwaiting()));
    expect(lines).toEqual(snapshotAwaiting().rewrites.map(([f, t]) => `${f} -> ${t}`));
  });

  it("kg chart shows one point per expansion with the event's numbers", () => {
    let state = withSnapshot(emptyState(), snapshotDone());
    for (const event of eventsFull()) {
      state = applyEvent(state, event);
    }
    const chart = kgChart(state);
    expect(chart.length).toBe(1);
    expect(chart[0]!.label).toBe("+mopping_cloth");
    const expansion = eventsFull().find((e) => e.event === "expansion_applied")!;
    expect(chart[0]!.nodes).toBe(expansion.nodes);
    expect(chart[0]!.edges).toBe(expansion.edges);
  });

  it("event feed formats numbered entries and honours the limit", () => {
    let state = emptyState();
    for (const event of eventsFull()) {
      state = applyEvent(state, event);
    }
    const feed = eventFeed(state, 5);
    expect(feed.length).toBe(5);
    expect(feed[feed.length - 1]).toContain("phase");
    expect(feed[0]!.startsWith("#")).toBe(true);
  });

  it("progress text is rendered as served", () => {
    const text = progressDone();
    expect(text).toContain("countertop");
    expect(text.split("\n")[0]).toContain("object");
  });
});
