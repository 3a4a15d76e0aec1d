// Thin HTTP client for the session service.

import type { AnswerPayload, KgPayload, Snapshot } from "./types.js";

export interface AnswerResult {
  ok: boolean;
  status: number;
  snapshot?: Snapshot;
  error?: string;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(payload: Record<string, unknown>): Promise<{ id: string; phase: string }> {
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) {
      throw new Error(`create failed: ${response.status}`);
    }
    return response.json();
  }

  async getSnapshot(id: string): Promise<Snapshot> {
    const response = await fetch(this.url(`/sessions/${id}`));
    if (!response.ok) {
      throw new Error(`snapshot failed: ${response.status}`);
    }
    return response.json();
  }

  async getKg(id: string): Promise<KgPayload> {
    const response = await fetch(this.url(`/sessions/${id}/kg`));
    if (!response.ok) {
      throw new Error(`kg failed: ${response.status}`);
    }
    return response.json();
  }

  async getProgress(id: string): Promise<string> {
    const response = await fetch(this.url(`/sessions/${id}/progress`));
    return response.text();
  }

  async postAnswer(id: string, answer: AnswerPayload): Promise<AnswerResult> {
    const response = await fetch(this.url(`/sessions/${id}/answer`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(answer),
    });
    if (response.ok) {
      return { ok: true, status: response.status, snapshot: await response.json() };
    }
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      if (body && body.detail) {
        detail = String(body.detail);
      }
    } catch {
      // keep the bare status
    }
    return { ok: false, status: response.status, error: detail };
  }

  eventsUrl(id: string, after: number): string {
    return this.url(`/sessions/${id}/events?after=${after}&follow=true`);
  }
}
