import type { Language, UiMessage, UiPrefs } from "./types.js";

// all browser-storage keys live under the amanda.* namespace
const PREFS_KEY = "amanda.prefs";
const SESSION_KEY = "amanda.session";
const historyKey = (sessionId: string) => `amanda.history.${sessionId}`;

const DEFAULT_PREFS: UiPrefs = { language: "en", voiceEnabled: true };

export function loadPrefs(storage: Storage): UiPrefs {
  const raw = storage.getItem(PREFS_KEY);
  if (!raw) return { ...DEFAULT_PREFS };
  try {
    const parsed = JSON.parse(raw);
    return {
      language: parsed.language === "zh" ? "zh" : "en",
      voiceEnabled: parsed.voiceEnabled !== false,
    };
  } catch {
    return { ...DEFAULT_PREFS };
  }
}

export function savePrefs(storage: Storage, prefs: UiPrefs): void {
  storage.setItem(PREFS_KEY, JSON.stringify(prefs));
}

export function sessionId(storage: Storage): string {
  let id = storage.getItem(SESSION_KEY);
  if (!id) {
    id = `web-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 10)}`;
    storage.setItem(SESSION_KEY, id);
  }
  return id;
}

export function loadHistory(storage: Storage, session: string): UiMessage[] {
  const raw = storage.getItem(historyKey(session));
  if (!raw) return [];
  try {
    const parsed = JSON.parse(raw);
    return Array.isArray(parsed) ? (parsed as UiMessage[]) : [];
  } catch {
    return [];
  }
}

export function saveHistory(storage: Storage, session: string, messages: UiMessage[]): void {
  storage.setItem(historyKey(session), JSON.stringify(messages));
}

export function clearHistory(storage: Storage, session: string): void {
  storage.removeItem(historyKey(session));
}

export function setLanguage(storage: Storage, language: Language): void {
  const prefs = loadPrefs(storage);
  savePrefs(storage, { ...prefs, language });
}
