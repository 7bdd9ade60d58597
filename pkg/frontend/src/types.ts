export type Language = "en" | "zh";

export type ReplyKind =
  | "Answer"
  | "Confirmation"
  | "Clarification"
  | "Handoff"
  | "SmallTalk";

export interface ChatResponse {
  reply_text: string;
  kind: ReplyKind;
  suggestions: string[];
  audio_url?: string;
  state_phase: string;
}

export interface UiMessage {
  direction: "user" | "bot" | "system";
  text: string;
  kind?: ReplyKind;
  suggestions?: string[];
  audioUrl?: string;
  timestamp: number;
}

export interface UiPrefs {
  language: Language;
  voiceEnabled: boolean;
}

/** Minimal slice of HTMLAudioElement the app needs; tests inject fakes. */
export interface AudioLike {
  play(): Promise<void> | void;
}

export interface AppDeps {
  /** fetch-compatible function used for all server calls */
  fetch: (url: string, init?: RequestInit) => Promise<Response>;
  /** localStorage-compatible store for history and preferences */
  storage: Storage;
  /** factory for playable audio handles */
  createAudio: (url: string) => AudioLike;
  /** explicit session id (tests); defaults to a persisted random id */
  sessionId?: string;
}
