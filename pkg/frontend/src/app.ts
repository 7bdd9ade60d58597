import { postChat } from "./api.js";
import { AudioController } from "./audio.js";
import { t } from "./strings.js";
import {
  loadHistory,
  loadPrefs,
  saveHistory,
  savePrefs,
  sessionId as persistedSessionId,
} from "./storage.js";
import type { AppDeps, ChatResponse, UiMessage, UiPrefs } from "./types.js";

/**
 * The chat surface: message bubbles, yes/no confirmation buttons,
 * suggestion chips directly above the input bar, per-message replay with
 * a global mute, a language toggle, and locally persisted history.
 *
 * Invariants kept here: bot bubbles show the server reply verbatim, at
 * most one chat request is in flight (the composer is disabled while
 * waiting), and a failed send never loses the typed text.
 */
export class ChatApp {
  readonly session: string;
  prefs: UiPrefs;
  messages: UiMessage[];
  pending = false;

  private deps: AppDeps;
  private audio: AudioController;
  private root: HTMLElement;
  private messagesEl!: HTMLElement;
  private suggestionsEl!: HTMLElement;
  private noticeEl!: HTMLElement;
  private chipsEl!: HTMLElement;
  private composerEl!: HTMLFormElement;
  private inputEl!: HTMLInputElement;
  private sendEl!: HTMLButtonElement;
  private muteEl!: HTMLButtonElement;
  private langEl!: HTMLButtonElement;

  constructor(root: HTMLElement, deps: AppDeps) {
    this.root = root;
    this.deps = deps;
    this.session = deps.sessionId ?? persistedSessionId(deps.storage);
    this.prefs = loadPrefs(deps.storage);
    this.messages = loadHistory(deps.storage, this.session);
    this.audio = new AudioController(deps.createAudio, !this.prefs.voiceEnabled);
    this.renderSkeleton();
    for (const message of this.messages) {
      this.renderMessage(message);
    }
    this.renderSuggestions(this.latestSuggestions());
  }

  /** Send a user message (typed, chip tap, or yes/no button). */
  async send(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed || this.pending) return;

    this.appendMessage({ direction: "user", text: trimmed, timestamp: Date.now() });
    this.inputEl.value = "";
    this.setPending(true);
    try {
      const reply: ChatResponse = await postChat(
        this.deps.fetch,
        this.session,
        trimmed,
        this.prefs.language,
      );
      const message: UiMessage = {
        direction: "bot",
        text: reply.reply_text, // verbatim: the UI never rewrites bot text
        kind: reply.kind,
        suggestions: reply.suggestions ?? [],
        audioUrl: reply.audio_url,
        timestamp: Date.now(),
      };
      this.appendMessage(message);
      this.renderSuggestions(message.kind === "Answer" ? message.suggestions ?? [] : []);
      if (message.audioUrl) {
        this.audio.autoplay(message.audioUrl);
      }
    } catch {
      this.appendMessage({
        direction: "system",
        text: t("sendFailed", this.prefs.language),
        timestamp: Date.now(),
      });
      this.renderRetry(trimmed);
      this.inputEl.value = trimmed; // never lose the typed text
    } finally {
      this.setPending(false);
    }
  }

  toggleMute(): void {
    this.prefs = { ...this.prefs, voiceEnabled: !this.prefs.voiceEnabled };
    savePrefs(this.deps.storage, this.prefs);
    this.audio.setMuted(!this.prefs.voiceEnabled);
    this.muteEl.textContent = t(this.prefs.voiceEnabled ? "muteOff" : "muteOn", this.prefs.language);
  }

  toggleLanguage(): void {
    this.prefs = { ...this.prefs, language: this.prefs.language === "en" ? "zh" : "en" };
    savePrefs(this.deps.storage, this.prefs);
    this.relabel();
  }

  replay(url: string): void {
    this.audio.replay(url);
  }

  private latestSuggestions(): string[] {
    for (let i = this.messages.length - 1; i >= 0; i--) {
      const m = this.messages[i];
      if (m.direction === "bot") {
        return m.kind === "Answer" ? m.suggestions ?? [] : [];
      }
    }
    return [];
  }

  private appendMessage(message: UiMessage): void {
    this.messages.push(message);
    saveHistory(this.deps.storage, this.session, this.messages);
    this.renderMessage(message);
  }

  private setPending(pending: boolean): void {
    this.pending = pending;
    this.inputEl.disabled = pending;
    this.sendEl.disabled = pending;
  }

  // ----- rendering ---------------------------------------------------------

  private renderSkeleton(): void {
    this.root.innerHTML = "";
    this.root.classList.add("chat");

    const header = el("header", "chat-header");
    const title = el("h1", "chat-title");
    title.dataset.role = "title";
    const controls = el("div", "chat-controls");
    this.muteEl = el("button", "control") as HTMLButtonElement;
    this.muteEl.type = "button";
    this.muteEl.dataset.role = "mute-toggle";
    this.muteEl.addEventListener("click", () => this.toggleMute());
    this.langEl = el("button", "control") as HTMLButtonElement;
    this.langEl.type = "button";
    this.langEl.dataset.role = "lang-toggle";
    this.langEl.addEventListener("click", () => this.toggleLanguage());
    controls.append(this.muteEl, this.langEl);
    header.append(title, controls);

    const disclaimer = el("p", "disclaimer");
    disclaimer.dataset.role = "disclaimer";

    this.messagesEl = el("main", "messages");
    this.messagesEl.dataset.role = "messages";

    // the suggestion block sits directly above the input bar
    this.suggestionsEl = el("div", "suggestions");
    this.suggestionsEl.dataset.role = "suggestions";
    this.suggestionsEl.hidden = true;
    this.noticeEl = el("p", "suggestions-notice");
    this.noticeEl.dataset.role = "suggestions-notice";
    this.chipsEl = el("div", "chips");
    this.chipsEl.dataset.role = "chips";
    this.suggestionsEl.append(this.noticeEl, this.chipsEl);

    this.composerEl = el("form", "composer") as HTMLFormElement;
    this.composerEl.dataset.role = "composer";
    this.inputEl = el("input", "composer-input") as HTMLInputElement;
    this.inputEl.dataset.role = "input";
    this.sendEl = el("button", "composer-send") as HTMLButtonElement;
    this.sendEl.type = "submit";
    this.sendEl.dataset.role = "send";
    this.composerEl.append(this.inputEl, this.sendEl);
    this.composerEl.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.send(this.inputEl.value);
    });

    this.root.append(header, disclaimer, this.messagesEl, this.suggestionsEl, this.composerEl);
    this.relabel();
  }

  private relabel(): void {
    const lang = this.prefs.language;
    (this.root.querySelector("[data-role=title]") as HTMLElement).textContent = t("title", lang);
    (this.root.querySelector("[data-role=disclaimer]") as HTMLElement).textContent = t(
      "disclaimer",
      lang,
    );
    this.inputEl.placeholder = t("inputPlaceholder", lang);
    this.sendEl.textContent = t("send", lang);
    this.muteEl.textContent = t(this.prefs.voiceEnabled ? "muteOff" : "muteOn", lang);
    this.langEl.textContent = t("languageToggle", lang);
    this.noticeEl.textContent = t("suggestionsNotice", lang);
  }

  private renderMessage(message: UiMessage): void {
    const bubble = el("div", `bubble ${message.direction}`);
    bubble.dataset.role = "bubble";
    bubble.dataset.direction = message.direction;
    if (message.kind) bubble.dataset.kind = message.kind;

    const text = el("span", "bubble-text");
    text.dataset.role = "bubble-text";
    text.textContent = message.text;
    bubble.append(text);

    if (message.direction === "bot" && message.kind === "Confirmation") {
      const yes = el("button", "confirm yes") as HTMLButtonElement;
      yes.type = "button";
      yes.dataset.role = "confirm-yes";
      yes.textContent = t("yes", this.prefs.language);
      yes.addEventListener("click", () => void this.send("yes"));
      const no = el("button", "confirm no") as HTMLButtonElement;
      no.type = "button";
      no.dataset.role = "confirm-no";
      no.textContent = t("no", this.prefs.language);
      no.addEventListener("click", () => void this.send("no"));
      bubble.append(yes, no);
    }

    if (message.direction === "bot" && message.audioUrl) {
      const replay = el("button", "replay") as HTMLButtonElement;
      replay.type = "button";
      replay.dataset.role = "replay";
      replay.textContent = t("replay", this.prefs.language);
      const url = message.audioUrl;
      replay.addEventListener("click", () => this.replay(url));
      bubble.append(replay);
    }

    this.messagesEl.append(bubble);
    this.messagesEl.scrollTop = this.messagesEl.scrollHeight;
  }

  private renderSuggestions(suggestions: string[]): void {
    this.chipsEl.innerHTML = "";
    if (!suggestions.length) {
      this.suggestionsEl.hidden = true;
      return;
    }
    this.suggestionsEl.hidden = false;
    for (const question of suggestions) {
      const chip = el("button", "chip") as HTMLButtonElement;
      chip.type = "button";
      chip.dataset.role = "chip";
      chip.textContent = question;
      chip.addEventListener("click", () => void this.send(question));
      this.chipsEl.append(chip);
    }
  }

  private renderRetry(originalText: string): void {
    const last = this.messagesEl.lastElementChild;
    if (!last) return;
    const retry = el("button", "retry") as HTMLButtonElement;
    retry.type = "button";
    retry.dataset.role = "retry";
    retry.textContent = t("retry", this.prefs.language);
    retry.addEventListener("click", () => void this.send(originalText));
    last.append(retry);
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

export function createChatApp(root: HTMLElement, deps: AppDeps): ChatApp {
  return new ChatApp(root, deps);
}
