// Wire types mirroring the service API (snake_case as sent on the wire).

export type HintType = "planning" | "debugging" | "optimization";
export type RatingValue = "up" | "down" | "unrated";

export interface HintPayload {
  hint_id: string;
  hint_type: HintType;
  hint_text: string;
  reflection: string;
  requested_at: number;
  delivered_at: number;
  collapsed: boolean;
  rating?: RatingValue;
  revisit_count?: number;
}

export interface HintResponse {
  hint: HintPayload;
  remaining_quota: number;
}

export interface SessionPayload {
  student_id: string;
  question_id: string;
  consent_given: boolean;
  remaining_quota: number;
  solved: boolean;
  best_score: number;
  hints: HintPayload[];
  submissions: { at: number; score: number }[];
}

export interface QuestionPayload {
  question_id: string;
  assignment_id: string;
  prompt_text: string;
  starter_code: string;
  time_limit: number;
}

export interface SubmissionResult {
  score: number;
  solved: boolean;
  status: string;
}

export type HintTypeDescriptions = Record<HintType, string>;
