// DOM glue: paints the render models into the page and wires form posts.
// No domain logic lives here; see viewmodel/question/panels.

import type { AnswerPayload } from "./types.js";
import type { AnswerDraft, QuestionView } from "./question.js";
import { validateAnswer } from "./question.js";
import { eventFeed, kgChart, planPanel, rewritePanel } from "./panels.js";
import { headerLine, frozen, type SessionViewState } from "./viewmodel.js";

function byId(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (element === null) {
    throw new Error(`missing #${id}`);
  }
  return element;
}

function fillList(id: string, lines: string[]): void {
  const root = byId(id);
  root.textContent = "";
  for (const line of lines) {
    const item = document.createElement("li");
    item.textContent = line;
    root.appendChild(item);
  }
}

export function render(state: SessionViewState): void {
  byId("header").textContent = headerLine(state);
  fillList(
    "plan",
    planPanel(state).map((line) => `${line.label}  [${line.status}]`),
  );
  fillList("rewrites", rewritePanel(state));
  fillList(
    "kg-chart",
    kgChart(state).map((p) => `${p.label}: ${p.nodes} nodes, ${p.edges} edges`),
  );
  fillList("events", eventFeed(state));
  byId("progress").textContent = state.progressText;
  byId("error").textContent = state.lastError ?? "";
  byId("question").classList.toggle("frozen", frozen(state));
}

export function renderQuestion(
  question: QuestionView | null,
  submit: (payload: AnswerPayload) => void,
  showError: (message: string) => void,
): void {
  const root = byId("question");
  root.textContent = "";
  if (question === null) {
    return;
  }
  const prompt = document.createElement("p");
  prompt.textContent = question.prompt;
  root.appendChild(prompt);

  const trySubmit = (draft: AnswerDraft) => {
    const outcome = validateAnswer(question, draft);
    if (outcome.ok) {
      submit(outcome.payload);
    } else {
      showError(outcome.error); // invalid input never leaves the page
    }
  };

  if (question.kind === "existence_check") {
    const picker = document.createElement("select");
    for (const entity of question.correctionChoices) {
      const option = document.createElement("option");
      option.value = entity;
      option.textContent = entity;
      picker.appendChild(option);
    }
    const correct = document.createElement("button");
    correct.textContent = "it means this existing entity";
    correct.onclick = () => trySubmit({ choice: "correction", word: picker.value });
    const deny = document.createElement("button");
    deny.textContent = "no such thing here";
    deny.onclick = () => trySubmit({ choice: "denies_existence" });
    const confirm = document.createElement("button");
    confirm.textContent = "it exists and is new";
    confirm.onclick = () => trySubmit({ choice: "confirms_new" });
    root.append(picker, correct, deny, confirm);
    return;
  }
  if (question.field === "boolean") {
    const yes = document.createElement("button");
    yes.textContent = "yes";
    yes.onclick = () => trySubmit({ value: true });
    const no = document.createElement("button");
    no.textContent = "no";
    no.onclick = () => trySubmit({ value: false });
    root.append(yes, no);
    return;
  }
  const field = document.createElement("input");
  field.placeholder = question.field === "location" ? "location name" : "word";
  const send = document.createElement("button");
  send.textContent = "answer";
  send.onclick = () => trySubmit({ value: field.value });
  root.append(field, send);
}
