/**
 * Page wiring. Two entry points, picked by URL query:
 *
 *   ?view=patient&script=cardio_sport&patient=<id>   — live interview + survey
 *   ?view=doctor&session=<session_id>                — summary dashboard + survey
 *
 * The API base defaults to the page origin; override with ?api=http://host:port.
 */

import { MicaClient } from "./api.js";
import { ChatController } from "./chat.js";
import { showDoctorSummary } from "./summary.js";
import { SurveyForm } from "./survey.js";

function requireElement(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element;
}

export async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const client = new MicaClient(params.get("api") ?? window.location.origin);
  const main = requireElement("main");
  const surveyRoot = requireElement("survey");

  const view = params.get("view") ?? "patient";
  if (view === "doctor") {
    const sessionId = params.get("session");
    if (!sessionId) {
      main.textContent = "add ?session=<session_id> to review an interview";
      return;
    }
    await showDoctorSummary(client, main, sessionId);
    new SurveyForm(client, surveyRoot, sessionId, "doctor").render();
    return;
  }

  const scriptId = params.get("script") ?? "cardio_sport";
  const patientId = params.get("patient") ?? `walk-in-${Date.now()}`;
  const chat = new ChatController(client, main, (sessionId) => {
    new SurveyForm(client, surveyRoot, sessionId, "patient").render();
  });
  await chat.start(scriptId, patientId);
}

if (typeof document !== "undefined" && document.getElementById("main")) {
  void boot();
}
