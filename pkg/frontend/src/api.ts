/** Thin JSON client for the task service. All calls are sequential per
 * session; the server is authoritative for questions, pressure, grading. */

export interface TrialView {
  trial_index: number;
  question: string;
  pressure: boolean;
  likert_due: boolean;
  done: false;
}

export interface SessionDone {
  done: true;
}

export interface ResponseBody {
  trial_index: number;
  choice: boolean;
  rt_ms: number;
  attention?: number;
  anxiety?: number;
}

export interface ResponseResult {
  accepted: boolean;
  correct: boolean;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(`service error ${status}: ${detail}`);
  }
}

async function parseError(res: Response): Promise<ApiError> {
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    /* non-JSON error body; keep statusText */
  }
  return new ApiError(res.status, detail);
}

export class TaskClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  async createSession(
    participantId: string,
    group: string,
    nTrials: number,
    seed?: number,
  ): Promise<string> {
    const body = { participant_id: participantId, group, n_trials: nTrials, seed };
    const out = await this.request<{ session_id: string }>("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return out.session_id;
  }

  getTrial(sessionId: string): Promise<TrialView | SessionDone> {
    return this.request(`/sessions/${sessionId}/trial`);
  }

  postResponse(sessionId: string, body: ResponseBody): Promise<ResponseResult> {
    return this.request(`/sessions/${sessionId}/response`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async exportCsv(sessionId: string): Promise<string> {
    const res = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}/export`);
    if (!res.ok) throw await parseError(res);
    return res.text();
  }
}
