/**
 * Satisfaction survey form: exactly the role's dimension set, 1..9 each.
 *
 * Client-side validation blocks submission until every dimension has an
 * integer in range; server-side 422s are surfaced verbatim next to the form
 * so nothing silently disappears.
 */

import { ApiError, MicaClient, SurveyPayload, SurveyRole, dimensionsFor } from "./api.js";

export interface SurveyFormState {
  role: SurveyRole;
  values: Record<string, number | null>;
}

export function initialSurveyState(role: SurveyRole): SurveyFormState {
  const values: Record<string, number | null> = {};
  for (const dimension of dimensionsFor(role)) values[dimension] = null;
  return { role, values };
}

export function setScore(state: SurveyFormState, dimension: string, value: number): SurveyFormState {
  if (!(dimension in state.values)) return state;
  return { ...state, values: { ...state.values, [dimension]: value } };
}

/** null when the form is submittable, else the first problem. */
export function validationProblem(state: SurveyFormState): string | null {
  for (const [dimension, value] of Object.entries(state.values)) {
    if (value === null) return `${dimension}: please pick a score`;
    if (!Number.isInteger(value) || value < 1 || value > 9)
      return `${dimension}: scores run from 1 to 9`;
  }
  return null;
}

export function buildPayload(
  state: SurveyFormState,
  sessionId: string,
  respondentAge?: number,
): SurveyPayload {
  const scores: Record<string, number> = {};
  for (const [dimension, value] of Object.entries(state.values)) {
    if (value !== null) scores[dimension] = value;
  }
  const payload: SurveyPayload = { session_id: sessionId, role: state.role, scores };
  if (state.role === "patient" && respondentAge !== undefined) payload.respondent_age = respondentAge;
  return payload;
}

export interface SurveyFormOptions {
  onSubmitted?: () => void;
  respondentAge?: number;
}

export class SurveyForm {
  state: SurveyFormState;

  constructor(
    private readonly client: MicaClient,
    private readonly root: HTMLElement,
    private readonly sessionId: string,
    role: SurveyRole,
    private readonly options: SurveyFormOptions = {},
  ) {
    this.state = initialSurveyState(role);
  }

  render(statusText = ""): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    this.root.classList.add("survey-form");

    const title = doc.createElement("h2");
    title.textContent = `Your feedback (${this.state.role})`;
    this.root.appendChild(title);

    for (const dimension of dimensionsFor(this.state.role)) {
      const row = doc.createElement("div");
      row.className = "survey-row";
      row.dataset.dimension = dimension;
      const label = doc.createElement("label");
      label.textContent = dimension.replace(/_/g, " ");
      row.appendChild(label);
      for (let value = 1; value <= 9; value++) {
        const button = doc.createElement("button");
        button.className = "score-button";
        button.dataset.value = String(value);
        button.textContent = String(value);
        if (this.state.values[dimension] === value) button.classList.add("selected");
        button.addEventListener("click", () => {
          this.state = setScore(this.state, dimension, value);
          this.render();
        });
        row.appendChild(button);
      }
      this.root.appendChild(row);
    }

    const problem = validationProblem(this.state);
    const submit = doc.createElement("button");
    submit.className = "survey-submit";
    submit.textContent = "submit survey";
    submit.disabled = problem !== null;
    submit.addEventListener("click", () => void this.submit());
    this.root.appendChild(submit);

    const status = doc.createElement("p");
    status.className = "survey-status";
    status.textContent = statusText || (problem ?? "");
    this.root.appendChild(status);
  }

  async submit(): Promise<void> {
    const problem = validationProblem(this.state);
    if (problem !== null) {
      this.render(problem);
      return;
    }
    try {
      await this.client.submitSurvey(
        buildPayload(this.state, this.sessionId, this.options.respondentAge),
      );
      this.render("thank you — your answers were recorded");
      this.options.onSubmitted?.();
    } catch (error) {
      if (error instanceof ApiError) {
        this.render(`the server rejected the survey: ${error.code}`);
        return;
      }
      throw error;
    }
  }
}
