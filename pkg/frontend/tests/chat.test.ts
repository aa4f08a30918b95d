/** Chat view: input modes, payload-verbatim rendering, retry behavior. */

import { describe, expect, it, vi } from "vitest";

import { AnswerResponse, MicaClient, Prompt } from "../src/api.js";
import {
  ChatController,
  applyAnswer,
  applyHelp,
  applySendFailure,
  initialChatState,
  inputModeFor,
  renderChat,
  startChat,
} from "../src/chat.js";

const agePrompt: Prompt = { node_id: "q_age", text: "How old are you?", kind: "numeric" };
const sexPrompt: Prompt = {
  node_id: "q_sex",
  text: "Are you male or female?",
  kind: "choice",
  options: ["male", "female"],
};
const smokePrompt: Prompt = { node_id: "q_tobacco", text: "Do you smoke tobacco?", kind: "yesno" };

function noopHandlers() {
  return { onSend: vi.fn(), onHelp: vi.fn(), onRetry: vi.fn() };
}

describe("input mode mapping", () => {
  it("derives the widget from the prompt kind", () => {
    expect(inputModeFor(smokePrompt)).toBe("yesno_buttons");
    expect(inputModeFor(sexPrompt)).toBe("option_buttons");
    expect(inputModeFor(agePrompt)).toBe("numeric_field");
    expect(inputModeFor({ node_id: "q", text: "?", kind: "text" })).toBe("free_text");
  });
});

describe("rendering", () => {
  it("yes/no buttons carry exactly 'yes' and 'no' payloads", () => {
    const root = document.createElement("div");
    const handlers = noopHandlers();
    renderChat(root, startChat(initialChatState(), "s1", smokePrompt), handlers);
    const buttons = [...root.querySelectorAll<HTMLButtonElement>(".answer-button")];
    expect(buttons.map((b) => b.dataset.payload)).toEqual(["yes", "no"]);
    buttons[0]!.click();
    expect(handlers.onSend).toHaveBeenCalledWith("yes");
  });

  it("choice prompts render one button per option, payload = label", () => {
    const root = document.createElement("div");
    renderChat(root, startChat(initialChatState(), "s1", sexPrompt), noopHandlers());
    const buttons = [...root.querySelectorAll<HTMLButtonElement>(".answer-button")];
    expect(buttons.map((b) => b.dataset.payload)).toEqual(["male", "female"]);
  });

  it("prompt text is shown verbatim from the payload", () => {
    const root = document.createElement("div");
    renderChat(root, startChat(initialChatState(), "s1", agePrompt), noopHandlers());
    expect(root.querySelector(".msg-prompt")!.textContent).toBe("How old are you?");
  });

  it("completion hides the controls and shows the banner", () => {
    let state = startChat(initialChatState(), "s1", smokePrompt);
    state = applyAnswer(state, "no", { state: "complete" });
    const root = document.createElement("div");
    renderChat(root, state, noopHandlers());
    expect(root.querySelector(".completion-banner")).not.toBeNull();
    expect(root.querySelector(".send-button")).toBeNull();
    expect(state.complete).toBe(true);
  });
});

describe("answer folding", () => {
  it("a rejection shows the payload help inline and re-asks the same question", () => {
    const rejected: AnswerResponse = {
      state: "rejected",
      reject_reason: "unparseable",
      prompt: { ...agePrompt, help: "Enter your age in years, as a whole number." },
    };
    let state = startChat(initialChatState(), "s1", agePrompt);
    state = applyAnswer(state, "one hundred and ten", rejected);
    const texts = state.messages.map((m) => m.text);
    expect(texts).toContain("Enter your age in years, as a whole number.");
    expect(texts.filter((t) => t === "How old are you?")).toHaveLength(2);
    expect(state.prompt?.node_id).toBe("q_age");
  });

  it("an accepted answer advances to the next payload prompt", () => {
    let state = startChat(initialChatState(), "s1", agePrompt);
    state = applyAnswer(state, "45", { state: "awaiting_answer", prompt: sexPrompt });
    expect(state.prompt?.node_id).toBe("q_sex");
    expect(state.messages.at(-1)?.text).toBe("Are you male or female?");
  });

  it("help text is appended verbatim", () => {
    let state = startChat(initialChatState(), "s1", agePrompt);
    state = applyHelp(state, "Whole years only.");
    expect(state.messages.at(-1)).toMatchObject({ variant: "help", text: "Whole years only." });
  });
});

describe("network failure", () => {
  function failingClient(): MicaClient {
    const fetchImpl = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    return new MicaClient("http://unreachable", fetchImpl as unknown as typeof fetch);
  }

  it("keeps the typed input and offers a retry", async () => {
    const root = document.createElement("div");
    const controller = new ChatController(failingClient(), root);
    controller.state = startChat(initialChatState(), "s1", agePrompt);
    await controller.send("44");
    expect(controller.state.unsent).toBe("44");
    renderChat(root, controller.state, noopHandlers());
    expect(root.querySelector<HTMLInputElement>(".free-text-input")!.value).toBe("44");
    expect(root.querySelector(".retry-button")).not.toBeNull();
  });

  it("retry resubmits the kept utterance", async () => {
    const fetchImpl = vi
      .fn()
      .mockRejectedValueOnce(new TypeError("fetch failed"))
      .mockResolvedValueOnce(
        new Response(JSON.stringify({ state: "awaiting_answer", prompt: sexPrompt }), {
          status: 200,
        }),
      );
    const client = new MicaClient("http://flaky", fetchImpl as unknown as typeof fetch);
    const controller = new ChatController(client, document.createElement("div"));
    controller.state = startChat(initialChatState(), "s1", agePrompt);
    await controller.send("44");
    expect(controller.state.unsent).toBe("44");
    await controller.retry();
    expect(controller.state.unsent).toBeNull();
    expect(controller.state.prompt?.node_id).toBe("q_sex");
    const lastCall = fetchImpl.mock.calls.at(-1)!;
    expect(JSON.parse((lastCall[1] as RequestInit).body as string)).toEqual({ utterance: "44" });
  });

  it("applySendFailure leaves a notice in the log", () => {
    const state = applySendFailure(startChat(initialChatState(), "s1", agePrompt), "44");
    expect(state.messages.at(-1)?.variant).toBe("notice");
  });
});

describe("request serialization", () => {
  it("never fires a second answer while one is in flight", async () => {
    let release!: (value: Response) => void;
    const gate = new Promise<Response>((resolve) => (release = resolve));
    const fetchImpl = vi.fn().mockReturnValueOnce(gate);
    const client = new MicaClient("http://slow", fetchImpl as unknown as typeof fetch);
    const controller = new ChatController(client, document.createElement("div"));
    controller.state = startChat(initialChatState(), "s1", agePrompt);

    const first = controller.send("44");
    await controller.send("45"); // double-click while the first is pending
    expect(fetchImpl).toHaveBeenCalledTimes(1);
    release(
      new Response(JSON.stringify({ state: "awaiting_answer", prompt: sexPrompt }), { status: 200 }),
    );
    await first;
    expect(controller.state.prompt?.node_id).toBe("q_sex");
  });
});
