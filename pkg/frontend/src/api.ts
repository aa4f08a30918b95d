/**
 * Typed client for the interview service HTTP API.
 *
 * The UI never invents dialog logic: every prompt, help text, rejection and
 * completion state shown on screen comes from these payloads verbatim.
 */

export type PromptKind = "yesno" | "choice" | "numeric" | "text";

export interface Prompt {
  node_id: string;
  text: string;
  kind: PromptKind;
  options?: string[];
  help?: string;
}

export interface CreateSessionResponse {
  session_id: string;
  anon_ref: string;
  prompt: Prompt;
}

export type AnswerState = "awaiting_answer" | "complete" | "rejected";

export interface AnswerResponse {
  state: AnswerState;
  prompt?: Prompt;
  reject_reason?: string;
  warning?: string;
}

export interface SummaryFlag {
  id: string;
  triggered_by: string;
}

export interface SummaryAnswer {
  section: string;
  node_id: string;
  prompt: string;
  answer: boolean | number | string;
}

export interface DoctorSummary {
  anon_ref: string;
  script_name: string;
  script_version: number;
  red_flags: SummaryFlag[];
  profile: string;
  motivation: { level: string; source_score_id: string } | null;
  scores: { id: string; total: number; band: string }[];
  risk: { count: number; contributing: string[]; age_sex_contribution: number };
  motifs: { category: string; text: string; source: string; count: number }[];
  answers: SummaryAnswer[];
  interview_duration_ms: number;
  generated_at: number;
}

export type SurveyRole = "doctor" | "patient";

export interface SurveyPayload {
  session_id: string;
  role: SurveyRole;
  scores: Record<string, number>;
  respondent_age?: number;
}

export const DOCTOR_DIMENSIONS = [
  "service_quality",
  "consultation_quality",
  "data_collection_quality",
  "technology_confidence",
  "time_saving_feeling",
] as const;

export const PATIENT_DIMENSIONS = [
  "felt_listened",
  "felt_understood",
  "treatment_personalized",
] as const;

export function dimensionsFor(role: SurveyRole): readonly string[] {
  return role === "doctor" ? DOCTOR_DIMENSIONS : PATIENT_DIMENSIONS;
}

/** Non-2xx response; carries the service's error code (e.g. "session_complete"). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
  ) {
    super(`${status}: ${code}`);
  }
}

type FetchLike = typeof fetch;

export class MicaClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data: unknown = await response.json();
    if (!response.ok) {
      const code =
        typeof data === "object" && data !== null && "error" in data
          ? String((data as { error: unknown }).error)
          : "unknown_error";
      throw new ApiError(response.status, code);
    }
    return data as T;
  }

  createSession(scriptId: string, patientId: string): Promise<CreateSessionResponse> {
    return this.request("POST", "/v1/sessions", { script_id: scriptId, patient_id: patientId });
  }

  postAnswer(sessionId: string, utterance: string): Promise<AnswerResponse> {
    return this.request("POST", `/v1/sessions/${sessionId}/answer`, { utterance });
  }

  postHelp(sessionId: string): Promise<{ help: string }> {
    return this.request("POST", `/v1/sessions/${sessionId}/help`, {});
  }

  getDoctorSummary(sessionId: string): Promise<DoctorSummary> {
    return this.request("GET", `/v1/sessions/${sessionId}/summary?role=doctor`);
  }

  submitSurvey(payload: SurveyPayload): Promise<{ accepted: boolean }> {
    return this.request("POST", "/v1/surveys", payload);
  }

  getMetrics(): Promise<Record<string, unknown>> {
    return this.request("GET", "/v1/metrics");
  }
}
