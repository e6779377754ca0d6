// Thin typed client over the service HTTP API. The fetch implementation is
// injectable so tests can run without a server.

import type {
  HintResponse,
  HintType,
  HintTypeDescriptions,
  QuestionPayload,
  SessionPayload,
  SubmissionResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body?: unknown): Promise<T> {
    return this.call<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
  }

  consent(studentId: string): Promise<{ consented: boolean }> {
    return this.post("/api/consent", { student_id: studentId });
  }

  requestHint(body: {
    student_id: string;
    question_id: string;
    hint_type: HintType;
    reflection: string;
    code: string;
  }): Promise<HintResponse> {
    return this.post("/api/hints", body);
  }

  rate(hintId: string, rating: "up" | "down"): Promise<{ rating: string }> {
    return this.post(`/api/hints/${hintId}/rating`, { rating });
  }

  revisit(hintId: string): Promise<{ revisit_count: number }> {
    return this.post(`/api/hints/${hintId}/revisit`);
  }

  submit(body: {
    student_id: string;
    question_id: string;
    code: string;
  }): Promise<SubmissionResult> {
    return this.post("/api/submissions", body);
  }

  session(studentId: string, questionId: string): Promise<SessionPayload> {
    return this.call(`/api/sessions/${studentId}/${questionId}`);
  }

  questions(): Promise<QuestionPayload[]> {
    return this.call("/api/questions");
  }

  hintTypeDescriptions(): Promise<HintTypeDescriptions> {
    return this.call("/api/hint-type-descriptions");
  }
}
