// Question form model: turns the server's pending query into a renderable
// form and validates a draft answer before any request is sent.

import type { AnswerPayload, KgPayload, PendingQuery } from "./types.js";

export interface ExistenceQuestionView {
  kind: "existence_check";
  token: string;
  prompt: string;
  choices: ["correction", "denies_existence", "confirms_new"];
  correctionChoices: string[]; // server-provided entities only
}

export interface AttributeQuestionView {
  kind: "attribute_elicitation";
  entity: string;
  slot: string;
  field: "boolean" | "word" | "location";
  prompt: string;
}

export type QuestionView = ExistenceQuestionView | AttributeQuestionView;

export interface AnswerDraft {
  choice?: "correction" | "denies_existence" | "confirms_new";
  word?: string;
  value?: boolean | string;
}

export type Validation =
  | { ok: true; payload: AnswerPayload }
  | { ok: false; error: string };

export function questionView(pending: PendingQuery | null, kg: KgPayload | null): QuestionView | null {
  if (pending === null) {
    return null;
  }
  if (pending.kind === "existence_check") {
    return {
      kind: "existence_check",
      token: pending.token,
      prompt:
        `The plan mentions '${pending.token}' (step ${pending.mismatch.step}), ` +
        "which is not in the knowledge base. What should happen?",
      choices: ["correction", "denies_existence", "confirms_new"],
      correctionChoices: kg ? [...kg.entities] : [],
    };
  }
  const slot = pending.slot;
  if (slot === "location") {
    return {
      kind: "attribute_elicitation",
      entity: pending.entity,
      slot,
      field: "location",
      prompt: `Where is '${pending.entity}' located?`,
    };
  }
  if (slot.startsWith("capability:")) {
    const capability = slot.slice("capability:".length);
    return {
      kind: "attribute_elicitation",
      entity: pending.entity,
      slot,
      field: "boolean",
      prompt: `Does '${pending.entity}' have the capability ${capability}?`,
    };
  }
  return {
    kind: "attribute_elicitation",
    entity: pending.entity,
    slot,
    field: "word",
    prompt: `What is the ${slot} of '${pending.entity}'?`,
  };
}

const WORD_RE = /^[a-z_]\w*$/;

export function validateAnswer(question: QuestionView, draft: AnswerDraft): Validation {
  if (question.kind === "existence_check") {
    if (draft.choice === "denies_existence" || draft.choice === "confirms_new") {
      return { ok: true, payload: { kind: draft.choice } };
    }
    if (draft.choice === "correction") {
      const word = (draft.word ?? "").trim();
      if (!word) {
        return { ok: false, error: "pick the correct entity" };
      }
      if (!question.correctionChoices.includes(word)) {
        return { ok: false, error: `'${word}' is not a known entity` };
      }
      return { ok: true, payload: { kind: "correction", word } };
    }
    return { ok: false, error: "choose one of the three outcomes" };
  }
  if (question.field === "boolean") {
    if (typeof draft.value !== "boolean") {
      return { ok: false, error: "answer yes or no" };
    }
    return { ok: true, payload: { kind: "attribute", value: draft.value } };
  }
  const word = typeof draft.value === "string" ? draft.value.trim().toLowerCase() : "";
  if (!WORD_RE.test(word)) {
    return { ok: false, error: "enter a single lowercase word" };
  }
  return { ok: true, payload: { kind: "attribute", value: word } };
}
