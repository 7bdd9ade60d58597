import type { Language } from "./types.js";

/** Every user-visible static string, in both interface languages. */
const TABLE = {
  title: {
    en: "AMANDA — diabetes care assistant",
    zh: "AMANDA——糖尿病护理助手",
  },
  disclaimer: {
    en: "Demonstration content only — always confirm medical advice with your care team.",
    zh: "仅为演示内容——医疗建议请务必与您的医疗团队确认。",
  },
  inputPlaceholder: {
    en: "Type your question…",
    zh: "请输入您的问题…",
  },
  send: { en: "Send", zh: "发送" },
  yes: { en: "Yes", zh: "是" },
  no: { en: "No", zh: "否" },
  retry: { en: "Retry", zh: "重试" },
  sendFailed: {
    en: "Could not reach the assistant. Your message was kept — retry when ready.",
    zh: "无法连接助手。您的消息已保留——请稍后重试。",
  },
  suggestionsNotice: {
    en: "Here are more questions you might ask",
    zh: "您还可以问这些问题",
  },
  replay: { en: "Play again", zh: "重新播放" },
  muteOn: { en: "Voice off", zh: "语音已关" },
  muteOff: { en: "Voice on", zh: "语音已开" },
  languageToggle: { en: "简体中文", zh: "EN" },
  clearedChat: { en: "New conversation", zh: "新的对话" },
} as const;

export type StringKey = keyof typeof TABLE;

export function t(key: StringKey, language: Language): string {
  return TABLE[key][language];
}

/** Lint helper: keys whose table entry is missing a language or empty. */
export function incompleteStrings(): string[] {
  const missing: string[] = [];
  for (const [key, entry] of Object.entries(TABLE)) {
    for (const lang of ["en", "zh"] as Language[]) {
      const value = (entry as Record<string, string>)[lang];
      if (typeof value !== "string" || value.length === 0) {
        missing.push(`${key}.${lang}`);
      }
    }
  }
  return missing;
}

export const STRING_KEYS = Object.keys(TABLE) as StringKey[];
