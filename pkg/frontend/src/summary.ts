/**
 * Doctor summary dashboard.
 *
 * The red-flag panel renders above everything else, mirroring the service's
 * prioritization; with zero flags an explicit "no red flags" panel still
 * takes the top slot. Everything displayed is payload text.
 */

import { ApiError, DoctorSummary, MicaClient } from "./api.js";

function panel(doc: Document, className: string, title: string): HTMLElement {
  const element = doc.createElement("section");
  element.className = `panel ${className}`;
  const heading = doc.createElement("h2");
  heading.textContent = title;
  element.appendChild(heading);
  return element;
}

export function renderSummary(root: HTMLElement, summary: DoctorSummary): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.classList.add("doctor-summary");

  const flags = panel(doc, "flags-panel", "Red flags");
  if (summary.red_flags.length === 0) {
    const none = doc.createElement("p");
    none.className = "no-flags";
    none.textContent = "no red flags";
    flags.appendChild(none);
  } else {
    const list = doc.createElement("ul");
    for (const flag of summary.red_flags) {
      const item = doc.createElement("li");
      item.className = "flag";
      item.dataset.flagId = flag.id;
      item.textContent = `${flag.id} — ${flag.triggered_by}`;
      list.appendChild(item);
    }
    flags.appendChild(list);
  }
  root.appendChild(flags);

  const badges = panel(doc, "badges-panel", "Patient");
  const profile = doc.createElement("span");
  profile.className = "badge badge-profile";
  profile.textContent = `profile: ${summary.profile}`;
  badges.appendChild(profile);
  if (summary.motivation) {
    const motivation = doc.createElement("span");
    motivation.className = "badge badge-motivation";
    motivation.textContent = `motivation: ${summary.motivation.level}`;
    badges.appendChild(motivation);
  }
  for (const score of summary.scores) {
    const badge = doc.createElement("span");
    badge.className = "badge badge-score";
    badge.textContent = `${score.id}: ${score.total} (${score.band})`;
    badges.appendChild(badge);
  }
  const risk = doc.createElement("span");
  risk.className = "badge badge-risk";
  risk.textContent = `risk factors: ${summary.risk.count}`;
  badges.appendChild(risk);
  root.appendChild(badges);

  if (summary.motifs.length > 0) {
    const motifs = panel(doc, "motifs-panel", "Complaints");
    const list = doc.createElement("ul");
    for (const motif of summary.motifs) {
      const item = doc.createElement("li");
      item.className = "motif";
      item.textContent =
        motif.count > 1 ? `${motif.category}: ${motif.text} (x${motif.count})` : `${motif.category}: ${motif.text}`;
      list.appendChild(item);
    }
    motifs.appendChild(list);
    root.appendChild(motifs);
  }

  const answers = panel(doc, "answers-panel", "Answers");
  let currentSection = "";
  let table: HTMLTableElement | null = null;
  for (const answer of summary.answers) {
    if (answer.section !== currentSection || table === null) {
      currentSection = answer.section;
      const heading = doc.createElement("h3");
      heading.textContent = answer.section;
      answers.appendChild(heading);
      table = doc.createElement("table");
      answers.appendChild(table);
    }
    const row = doc.createElement("tr");
    row.className = "answer-row";
    const question = doc.createElement("td");
    question.textContent = answer.prompt;
    const value = doc.createElement("td");
    value.textContent =
      answer.answer === true ? "yes" : answer.answer === false ? "no" : String(answer.answer);
    row.appendChild(question);
    row.appendChild(value);
    table.appendChild(row);
  }
  root.appendChild(answers);

  const timing = panel(doc, "timing-panel", "Timing");
  const duration = doc.createElement("p");
  duration.className = "duration";
  duration.textContent = `interview duration: ${(summary.interview_duration_ms / 60000).toFixed(1)} min`;
  timing.appendChild(duration);
  root.appendChild(timing);
}

export function renderSummaryPlaceholder(root: HTMLElement, text: string): void {
  root.textContent = "";
  const placeholder = root.ownerDocument.createElement("p");
  placeholder.className = "summary-placeholder";
  placeholder.textContent = text;
  root.appendChild(placeholder);
}

/** Fetch and render; a 409 means the interview is still running. */
export async function showDoctorSummary(
  client: MicaClient,
  root: HTMLElement,
  sessionId: string,
): Promise<void> {
  try {
    renderSummary(root, await client.getDoctorSummary(sessionId));
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      renderSummaryPlaceholder(root, "interview in progress — check back shortly");
      return;
    }
    throw error;
  }
}
