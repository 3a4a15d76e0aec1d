// Console entry point: one session per page, keyed by ?session=<id> (or
// created from ?scenario=<path>). State changes render only after server
// events or responses arrive; there is no optimistic UI.

import { ApiClient } from "./api.js";
import { render, renderQuestion } from "./dom.js";
import { EventStream, type MessageSource } from "./events.js";
import { questionView } from "./question.js";
import {
  applyEvent,
  emptyState,
  withError,
  withKg,
  withProgress,
  withSnapshot,
  type SessionViewState,
} from "./viewmodel.js";

const api = new ApiClient("");
let state: SessionViewState = emptyState();
let sessionId = "";

function browserSource(url: string): MessageSource {
  const source = new EventSource(url);
  const adapter: MessageSource = {
    onmessage: null,
    onerror: null,
    close: () => source.close(),
  };
  source.onmessage = (message) => adapter.onmessage?.({ data: String(message.data) });
  source.onerror = () => adapter.onerror?.();
  return adapter;
}

function paint(): void {
  render(state);
  renderQuestion(
    questionView(state.snapshot?.pending_query ?? null, state.kg),
    (payload) => {
      void api.postAnswer(sessionId, payload).then(async (result) => {
        if (result.ok && result.snapshot) {
          state = withError(withSnapshot(state, result.snapshot), null);
        } else {
          state = withError(state, result.error ?? "answer rejected");
        }
        await refreshSideData();
        paint();
      });
    },
    (message) => {
      state = withError(state, message);
      paint();
    },
  );
}

async function refreshSideData(): Promise<void> {
  state = withKg(state, await api.getKg(sessionId));
  state = withProgress(state, await api.getProgress(sessionId));
}

async function refreshSnapshot(): Promise<void> {
  state = withSnapshot(state, await api.getSnapshot(sessionId));
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const existing = params.get("session");
  if (existing) {
    sessionId = existing;
  } else {
    const scenario = params.get("scenario");
    if (!scenario) {
      document.body.textContent = "open with ?session=<id> or ?scenario=<path>";
      return;
    }
    const created = await api.createSession({ scenario_path: scenario });
    sessionId = created.id;
  }
  await refreshSnapshot();
  await refreshSideData();
  paint();

  const stream = new EventStream(
    (after) => api.eventsUrl(sessionId, after),
    browserSource,
    (event) => {
      state = applyEvent(state, event);
      void refreshSnapshot()
        .then(refreshSideData)
        .then(paint);
    },
  );
  stream.connect();
}

void start();
