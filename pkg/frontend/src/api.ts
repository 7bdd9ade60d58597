import type { ChatResponse, Language } from "./types.js";

export async function postChat(
  fetchFn: (url: string, init?: RequestInit) => Promise<Response>,
  sessionId: string,
  text: string,
  language: Language,
): Promise<ChatResponse> {
  const resp = await fetchFn("/api/chat", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ session_id: sessionId, text, language }),
  });
  if (!resp.ok) {
    throw new Error(`chat request failed: HTTP ${resp.status}`);
  }
  const body = (await resp.json()) as ChatResponse;
  if (typeof body.reply_text !== "string" || typeof body.kind !== "string") {
    throw new Error("malformed chat response");
  }
  return { ...body, suggestions: body.suggestions ?? [] };
}
