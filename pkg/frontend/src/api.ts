// Thin typed client over the lesson server's JSON API.

import type {
  ApiErrorBody,
  PackSummary,
  RenderState,
  Report,
  SessionCreated,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
  }
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: `http-${response.status}`, message: response.statusText };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  listPacks(): Promise<PackSummary[]> {
    return this.request("/api/packs");
  }

  createSession(packId: string, participant: string, seed?: number): Promise<SessionCreated> {
    return this.request("/api/sessions", {
      method: "POST",
      body: JSON.stringify({ pack_id: packId, participant, seed }),
    });
  }

  state(sessionId: string): Promise<RenderState> {
    return this.request(`/api/sessions/${sessionId}/state`);
  }

  step(sessionId: string, direction: "next" | "prev"): Promise<RenderState> {
    return this.request(`/api/sessions/${sessionId}/step`, {
      method: "POST",
      body: JSON.stringify({ direction }),
    });
  }

  answer(sessionId: string, questionId: string, selection: number[]): Promise<RenderState> {
    return this.request(`/api/sessions/${sessionId}/answers`, {
      method: "POST",
      body: JSON.stringify({ question_id: questionId, selection }),
    });
  }

  survey(sessionId: string, statementId: string, level: number): Promise<RenderState> {
    return this.request(`/api/sessions/${sessionId}/survey`, {
      method: "POST",
      body: JSON.stringify({ statement_id: statementId, level }),
    });
  }

  report(sessionId: string): Promise<Report> {
    return this.request(`/api/sessions/${sessionId}/report`);
  }
}
