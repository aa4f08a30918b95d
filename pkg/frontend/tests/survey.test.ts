/** Survey forms: role dimension sets, 1..9 enforcement, schema-true payloads. */

import { describe, expect, it, vi } from "vitest";

import { DOCTOR_DIMENSIONS, MicaClient, PATIENT_DIMENSIONS } from "../src/api.js";
import {
  SurveyForm,
  buildPayload,
  initialSurveyState,
  setScore,
  validationProblem,
} from "../src/survey.js";

function okClient(capture: unknown[]): MicaClient {
  const fetchImpl = vi.fn(async (_url: unknown, init?: RequestInit) => {
    capture.push(JSON.parse(init!.body as string));
    return new Response(JSON.stringify({ accepted: true }), { status: 200 });
  });
  return new MicaClient("http://stub", fetchImpl as unknown as typeof fetch);
}

describe("survey state", () => {
  it("doctor form has exactly the five doctor dimensions", () => {
    const state = initialSurveyState("doctor");
    expect(Object.keys(state.values).sort()).toEqual([...DOCTOR_DIMENSIONS].sort());
  });

  it("patient form has exactly the three patient dimensions", () => {
    const state = initialSurveyState("patient");
    expect(Object.keys(state.values).sort()).toEqual([...PATIENT_DIMENSIONS].sort());
  });

  it("submission is blocked while any dimension is unset", () => {
    let state = initialSurveyState("patient");
    expect(validationProblem(state)).toContain("pick a score");
    state = setScore(state, "felt_listened", 8);
    state = setScore(state, "felt_understood", 7);
    expect(validationProblem(state)).toContain("treatment_personalized");
    state = setScore(state, "treatment_personalized", 9);
    expect(validationProblem(state)).toBeNull();
  });

  it("out-of-range values are refused", () => {
    let state = initialSurveyState("patient");
    for (const dimension of PATIENT_DIMENSIONS) state = setScore(state, dimension, 5);
    state = { ...state, values: { ...state.values, felt_listened: 0 } };
    expect(validationProblem(state)).toContain("1 to 9");
    state = { ...state, values: { ...state.values, felt_listened: 10 } };
    expect(validationProblem(state)).toContain("1 to 9");
  });

  it("unknown dimensions cannot be set", () => {
    const state = initialSurveyState("patient");
    expect(setScore(state, "bogus_dimension", 5)).toBe(state);
  });

  it("payload matches the service schema exactly", () => {
    let state = initialSurveyState("doctor");
    for (const dimension of DOCTOR_DIMENSIONS) state = setScore(state, dimension, 7);
    const payload = buildPayload(state, "session-1");
    expect(payload.role).toBe("doctor");
    expect(Object.keys(payload.scores).sort()).toEqual([...DOCTOR_DIMENSIONS].sort());
    expect(Object.values(payload.scores).every((v) => Number.isInteger(v) && v >= 1 && v <= 9)).toBe(
      true,
    );
    expect(payload).not.toHaveProperty("respondent_age");
  });

  it("patients may attach their age, doctors never do", () => {
    let patient = initialSurveyState("patient");
    for (const dimension of PATIENT_DIMENSIONS) patient = setScore(patient, dimension, 6);
    expect(buildPayload(patient, "s", 48).respondent_age).toBe(48);
    let doctor = initialSurveyState("doctor");
    for (const dimension of DOCTOR_DIMENSIONS) doctor = setScore(doctor, dimension, 6);
    expect(buildPayload(doctor, "s", 48)).not.toHaveProperty("respondent_age");
  });
});

describe("survey form DOM", () => {
  it("renders one row per dimension with nine score buttons each", () => {
    const root = document.createElement("div");
    new SurveyForm(okClient([]), root, "s1", "doctor").render();
    const rows = root.querySelectorAll(".survey-row");
    expect(rows).toHaveLength(5);
    expect(rows[0]!.querySelectorAll(".score-button")).toHaveLength(9);
  });

  it("submit stays disabled until every dimension is picked", () => {
    const root = document.createElement("div");
    const form = new SurveyForm(okClient([]), root, "s1", "patient");
    form.render();
    expect(root.querySelector<HTMLButtonElement>(".survey-submit")!.disabled).toBe(true);
    for (const row of root.querySelectorAll(".survey-row")) {
      row.querySelector<HTMLButtonElement>('[data-value="8"]')!.click();
    }
    expect(root.querySelector<HTMLButtonElement>(".survey-submit")!.disabled).toBe(false);
  });

  it("a completed form posts the exact dimension set", async () => {
    const capture: unknown[] = [];
    const root = document.createElement("div");
    const form = new SurveyForm(okClient(capture), root, "s1", "patient");
    form.render();
    for (const row of root.querySelectorAll(".survey-row")) {
      row.querySelector<HTMLButtonElement>('[data-value="9"]')!.click();
    }
    await form.submit();
    expect(capture).toHaveLength(1);
    expect(capture[0]).toEqual({
      session_id: "s1",
      role: "patient",
      scores: { felt_listened: 9, felt_understood: 9, treatment_personalized: 9 },
    });
    expect(root.querySelector(".survey-status")!.textContent).toContain("thank you");
  });

  it("a server 422 is surfaced verbatim", async () => {
    const fetchImpl = vi.fn(async () =>
      new Response(JSON.stringify({ error: "score_out_of_range" }), { status: 422 }),
    );
    const client = new MicaClient("http://stub", fetchImpl as unknown as typeof fetch);
    const root = document.createElement("div");
    const form = new SurveyForm(client, root, "s1", "patient");
    form.render();
    for (const row of root.querySelectorAll(".survey-row")) {
      row.querySelector<HTMLButtonElement>('[data-value="5"]')!.click();
    }
    await form.submit();
    expect(root.querySelector(".survey-status")!.textContent).toContain("score_out_of_range");
  });
});
