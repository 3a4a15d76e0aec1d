// Server payload shapes. The console renders only what these carry; it never
// infers knowledge-graph content client-side.

export interface MismatchBrief {
  kind: string;
  token: string;
  step: number;
}

export interface PlanStep {
  index: number;
  text: string;
  status: "applied" | "failed" | "pending";
}

export interface PendingExistenceCheck {
  kind: "existence_check";
  token: string;
  mismatch: MismatchBrief;
}

export interface PendingElicitation {
  kind: "attribute_elicitation";
  entity: string;
  slot: string; // "type" | "capability:<Predicate>" | "location"
}

export type PendingQuery = PendingExistenceCheck | PendingElicitation;

export interface Snapshot {
  task: string;
  configuration: string;
  phase: string;
  feedback_count: number;
  feedback_budget: number;
  tokens_total: number;
  plan: { source: string | null; steps: PlanStep[] };
  pending_query: PendingQuery | null;
  unresolved: MismatchBrief[];
  rewrites: [string, string][];
  kb_stats: { nodes: number; edges: number };
  failure_cause: string | null;
  events: number;
}

export interface SessionEvent {
  event: string;
  seq: number;
  [key: string]: unknown;
}

export interface KgPayload {
  nodes: number;
  edges: number;
  entities: string[];
}

export type AnswerPayload =
  | { kind: "correction"; word: string }
  | { kind: "denies_existence" }
  | { kind: "confirms_new" }
  | { kind: "attribute"; value: boolean | string };

export const TERMINAL_PHASES = ["Done", "Failed"];

export function isTerminal(phase: string): boolean {
  return TERMINAL_PHASES.includes(phase);
}
