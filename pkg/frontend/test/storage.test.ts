import { beforeEach, describe, expect, it } from "vitest";

import {
  clearHistory,
  loadHistory,
  loadPrefs,
  saveHistory,
  savePrefs,
  sessionId,
} from "../src/storage.js";
import type { UiMessage } from "../src/types.js";

beforeEach(() => localStorage.clear());

describe("preferences", () => {
  it("defaults to english with voice enabled", () => {
    expect(loadPrefs(localStorage)).toEqual({ language: "en", voiceEnabled: true });
  });

  it("round-trips", () => {
    savePrefs(localStorage, { language: "zh", voiceEnabled: false });
    expect(loadPrefs(localStorage)).toEqual({ language: "zh", voiceEnabled: false });
  });

  it("survives corrupt stored json", () => {
    localStorage.setItem("amanda.prefs", "{nope");
    expect(loadPrefs(localStorage).language).toBe("en");
  });
});

describe("session id", () => {
  it("is created once and reused", () => {
    const first = sessionId(localStorage);
    expect(sessionId(localStorage)).toBe(first);
  });
});

describe("history", () => {
  const message: UiMessage = { direction: "user", text: "hi", timestamp: 1 };

  it("round-trips per session", () => {
    saveHistory(localStorage, "s1", [message]);
    expect(loadHistory(localStorage, "s1")).toEqual([message]);
    expect(loadHistory(localStorage, "s2")).toEqual([]);
  });

  it("clears", () => {
    saveHistory(localStorage, "s1", [message]);
    clearHistory(localStorage, "s1");
    expect(loadHistory(localStorage, "s1")).toEqual([]);
  });
});

describe("namespace", () => {
  it("keeps every key under amanda.*", () => {
    savePrefs(localStorage, { language: "en", voiceEnabled: true });
    sessionId(localStorage);
    saveHistory(localStorage, "s1", []);
    for (let i = 0; i < localStorage.length; i++) {
      expect(localStorage.key(i)!.startsWith("amanda.")).toBe(true);
    }
  });
});
