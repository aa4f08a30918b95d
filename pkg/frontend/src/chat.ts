/**
 * Patient chat view.
 *
 * State transitions are pure functions over the service payloads so they can
 * be unit-tested without a DOM; rendering projects the state into plain DOM
 * nodes. The input mode always mirrors the latest prompt's kind (buttons for
 * yes/no and options, a number field for numeric), and a free-text line is
 * always available so interruption keywords can still reach the server.
 */

import { AnswerResponse, MicaClient, Prompt } from "./api.js";

export type InputMode = "yesno_buttons" | "option_buttons" | "numeric_field" | "free_text";

export interface ChatMessage {
  from: "bot" | "patient";
  variant: "prompt" | "answer" | "help" | "rejection" | "banner" | "notice";
  text: string;
}

export interface ChatState {
  sessionId: string | null;
  prompt: Prompt | null;
  messages: ChatMessage[];
  complete: boolean;
  /** utterance that failed to send (network error) and can be retried */
  unsent: string | null;
}

export function initialChatState(): ChatState {
  return { sessionId: null, prompt: null, messages: [], complete: false, unsent: null };
}

export function inputModeFor(prompt: Prompt): InputMode {
  switch (prompt.kind) {
    case "yesno":
      return "yesno_buttons";
    case "choice":
      return "option_buttons";
    case "numeric":
      return "numeric_field";
    default:
      return "free_text";
  }
}

export function startChat(state: ChatState, sessionId: string, prompt: Prompt): ChatState {
  return {
    ...state,
    sessionId,
    prompt,
    complete: false,
    messages: [...state.messages, { from: "bot", variant: "prompt", text: prompt.text }],
  };
}

/** Fold one answer response into the chat; all displayed text is payload text. */
export function applyAnswer(state: ChatState, utterance: string, body: AnswerResponse): ChatState {
  const messages: ChatMessage[] = [
    ...state.messages,
    { from: "patient", variant: "answer", text: utterance },
  ];
  if (body.state === "complete") {
    messages.push({ from: "bot", variant: "banner", text: "Interview complete — thank you." });
    return { ...state, messages, prompt: null, complete: true, unsent: null };
  }
  if (body.state === "rejected") {
    if (body.prompt?.help) {
      messages.push({ from: "bot", variant: "rejection", text: body.prompt.help });
    }
    messages.push({ from: "bot", variant: "prompt", text: body.prompt?.text ?? "" });
    return { ...state, messages, prompt: body.prompt ?? state.prompt, unsent: null };
  }
  messages.push({ from: "bot", variant: "prompt", text: body.prompt?.text ?? "" });
  return { ...state, messages, prompt: body.prompt ?? null, unsent: null };
}

export function applyHelp(state: ChatState, helpText: string): ChatState {
  return {
    ...state,
    messages: [...state.messages, { from: "bot", variant: "help", text: helpText }],
  };
}

export function applySendFailure(state: ChatState, utterance: string): ChatState {
  return {
    ...state,
    unsent: utterance,
    messages: [
      ...state.messages,
      { from: "bot", variant: "notice", text: "Could not reach the server — your answer was kept, press retry." },
    ],
  };
}

// --- rendering --------------------------------------------------------------------

export interface ChatHandlers {
  onSend(utterance: string): void;
  onHelp(): void;
  onRetry(): void;
}

export function renderChat(root: HTMLElement, state: ChatState, handlers: ChatHandlers): void {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.classList.add("chat");

  const log = doc.createElement("div");
  log.className = "chat-log";
  for (const message of state.messages) {
    const row = doc.createElement("div");
    row.className = `msg msg-${message.from} msg-${message.variant}`;
    row.textContent = message.text;
    log.appendChild(row);
  }
  root.appendChild(log);

  if (state.complete) {
    const banner = doc.createElement("div");
    banner.className = "completion-banner";
    banner.textContent = "You are all set. Please fill the short survey below.";
    root.appendChild(banner);
    return;
  }
  if (!state.prompt) return;

  const controls = doc.createElement("div");
  controls.className = "chat-controls";
  const mode = inputModeFor(state.prompt);

  if (mode === "yesno_buttons") {
    for (const value of ["yes", "no"]) {
      const button = doc.createElement("button");
      button.className = "answer-button";
      button.dataset.payload = value;
      button.textContent = value;
      button.addEventListener("click", () => handlers.onSend(value));
      controls.appendChild(button);
    }
  } else if (mode === "option_buttons") {
    for (const label of state.prompt.options ?? []) {
      const button = doc.createElement("button");
      button.className = "answer-button";
      button.dataset.payload = label;
      button.textContent = label;
      button.addEventListener("click", () => handlers.onSend(label));
      controls.appendChild(button);
    }
  } else if (mode === "numeric_field") {
    const field = doc.createElement("input");
    field.type = "number";
    field.className = "numeric-input";
    controls.appendChild(field);
  }

  // free typing stays available on every question
  const text = doc.createElement("input");
  text.type = "text";
  text.className = "free-text-input";
  text.placeholder = "type an answer (or tell us what bothers you)";
  if (state.unsent !== null) text.value = state.unsent;
  const send = doc.createElement("button");
  send.className = "send-button";
  send.textContent = "send";
  send.addEventListener("click", () => {
    const numeric = controls.querySelector<HTMLInputElement>(".numeric-input");
    const utterance = text.value.trim() !== "" ? text.value : (numeric?.value ?? "");
    if (utterance !== "") handlers.onSend(utterance);
  });
  const help = doc.createElement("button");
  help.className = "help-button";
  help.textContent = "help";
  help.addEventListener("click", () => handlers.onHelp());
  controls.appendChild(text);
  controls.appendChild(send);
  controls.appendChild(help);

  if (state.unsent !== null) {
    const retry = doc.createElement("button");
    retry.className = "retry-button";
    retry.textContent = "retry";
    retry.addEventListener("click", () => handlers.onRetry());
    controls.appendChild(retry);
  }

  root.appendChild(controls);
}

// --- controller -------------------------------------------------------------------

/** Wires the client, the reducer and the renderer together for one session.
 *
 * One request in flight at a time: the engine serializes a session anyway,
 * so the client never fires a second answer before the transition lands.
 */
export class ChatController {
  state: ChatState = initialChatState();
  private busy = false;

  constructor(
    private readonly client: MicaClient,
    private readonly root: HTMLElement,
    private readonly onComplete: (sessionId: string) => void = () => {},
  ) {}

  private redraw(): void {
    renderChat(this.root, this.state, {
      onSend: (utterance) => void this.send(utterance),
      onHelp: () => void this.help(),
      onRetry: () => void this.retry(),
    });
  }

  async start(scriptId: string, patientId: string): Promise<void> {
    const created = await this.client.createSession(scriptId, patientId);
    this.state = startChat(this.state, created.session_id, created.prompt);
    this.redraw();
  }

  async send(utterance: string): Promise<void> {
    if (!this.state.sessionId || this.state.complete || this.busy) return;
    this.busy = true;
    try {
      const body = await this.client.postAnswer(this.state.sessionId, utterance);
      this.state = applyAnswer(this.state, utterance, body);
    } catch (error) {
      if (error instanceof TypeError) {
        // network failure: keep the typed input and offer a retry
        this.state = applySendFailure(this.state, utterance);
      } else {
        this.busy = false;
        throw error;
      }
    }
    this.busy = false;
    this.redraw();
    if (this.state.complete && this.state.sessionId) this.onComplete(this.state.sessionId);
  }

  async help(): Promise<void> {
    if (!this.state.sessionId || this.state.complete) return;
    const body = await this.client.postHelp(this.state.sessionId);
    this.state = applyHelp(this.state, body.help);
    this.redraw();
  }

  async retry(): Promise<void> {
    const pending = this.state.unsent;
    if (pending !== null) {
      this.state = { ...this.state, unsent: null };
      await this.send(pending);
    }
  }
}
