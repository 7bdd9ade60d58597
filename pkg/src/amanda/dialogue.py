"""Fail-safe dialogue engine over the FAQ knowledge base.

Two safety behaviors drive the state machine: predicted questions are
confirmed with the user before answering (input clarification), and
out-of-scope or low-confidence queries are redirected to a human
professional (expert-advice handoff).  Answer text always comes verbatim
from the knowledge base; the engine never generates medical content.

handle_message is a pure function of (state, text, thresholds, kb):
sessions can be processed concurrently as long as each state value is
owned by one in-flight request at a time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .kb import KnowledgeBase
from .nlu import LANGUAGES, EmptyInputError

PHASE_IDLE = "idle"
PHASE_AWAITING_CONFIRMATION = "awaiting_confirmation"

KIND_ANSWER = "Answer"
KIND_CONFIRMATION = "Confirmation"
KIND_CLARIFICATION = "Clarification"
KIND_HANDOFF = "Handoff"
KIND_SMALL_TALK = "SmallTalk"

AFFIRMATIVES = {
    "en": {"yes", "yeah", "yep", "ok", "okay", "correct", "right", "sure", "y"},
    "zh": {"是", "是的", "对", "对的", "好", "好的", "可以", "嗯", "没错", "正确"},
}
NEGATIVES = {
    "en": {"no", "nope", "nah", "wrong", "incorrect", "not really", "n"},
    "zh": {"不", "不是", "不对", "没有", "错", "不要", "不用"},
}

STRINGS = {
    "en": {
        "confirm": 'Just to confirm, did you mean: "{question}" (yes/no)',
        "rephrase": "Sorry I got that wrong. Please rephrase your question so I can understand it better.",
        "empty": "I didn't catch anything — could you type your question?",
        "handoff": (
            "I'm not able to answer that safely. Please consult your nurse or a doctor "
            "for advice on this."
        ),
    },
    "zh": {
        "confirm": "请确认，您是想问：“{question}”（是/否）",
        "rephrase": "抱歉我理解错了。请换一种说法再问一次，以便我更好地理解。",
        "empty": "我没有收到内容——请输入您的问题。",
        "handoff": "这个问题我无法可靠回答。请咨询您的护士或医生，获取专业建议。",
    },
}

_PUNCT_EDGES = re.compile(r"^[\s.,!?。！？、…]+|[\s.,!?。！？、…]+$")


@dataclass(frozen=True)
class Thresholds:
    confirm: float = 0.35
    direct: float = 1.01  # > 1 means a confirmation precedes every answer

    def __post_init__(self):
        if not 0.0 <= self.confirm <= self.direct:
            raise ValueError(
                f"need 0 <= confirm <= direct, got confirm={self.confirm} direct={self.direct}"
            )


@dataclass(frozen=True)
class DialogueState:
    session_id: str
    language: str = "en"
    phase: str = PHASE_IDLE
    candidate_intent: str | None = None
    turn_count: int = 0

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")
        if self.phase == PHASE_AWAITING_CONFIRMATION and not self.candidate_intent:
            raise ValueError("awaiting-confirmation state needs a candidate intent")


@dataclass(frozen=True)
class BotReply:
    text: str
    kind: str
    suggestions: tuple = ()
    audio_ref: str | None = None

    def __post_init__(self):
        if self.kind != KIND_ANSWER and self.suggestions:
            raise ValueError("suggestions are only attached to Answer replies")
        object.__setattr__(self, "suggestions", tuple(self.suggestions))


def _normalized(text: str) -> str:
    return _PUNCT_EDGES.sub("", text or "").strip().lower()


def is_affirmative(text: str, language: str) -> bool:
    # "yes"/"no" are also the web client's confirmation-button payloads,
    # accepted regardless of the session language
    return _normalized(text) in AFFIRMATIVES[language] or _normalized(text) == "yes"


def is_negative(text: str, language: str) -> bool:
    return _normalized(text) in NEGATIVES[language] or _normalized(text) == "no"


def suggest_related(intent_id: str, kb: KnowledgeBase, language: str) -> list:
    """Canonical questions of the entry's related intents, order preserved."""
    entry = kb.get(intent_id)
    if entry is None:
        return []
    return [kb.question(rid, language) for rid in entry.related[:3]]


def switch_language(state: DialogueState, language: str) -> DialogueState:
    """Change only the session language; any pending confirmation survives."""
    if language not in LANGUAGES:
        raise ValueError(f"unsupported language {language!r}")
    return replace(state, language=language)


def handle_message(
    state: DialogueState,
    text: str,
    nlu,
    kb: KnowledgeBase,
    thresholds: Thresholds = Thresholds(),
):
    """Advance the session by one user turn; returns (new_state, reply).

    Decision table (non-empty input; `conf` is the top intent confidence):
      awaiting + affirmative          -> Answer for the candidate, suggestions attached
      awaiting + negative             -> Clarification asking to rephrase
      awaiting + anything else       -> treated as a fresh query (the rephrase itself)
      out-of-scope top intent         -> Handoff, at any confidence
      small-talk top intent           -> SmallTalk, at any confidence
      conf >= direct                 -> Answer with suggestions
      confirm <= conf < direct       -> Confirmation echoing the canonical question
      conf < confirm                 -> Handoff
    Empty input is always a Clarification and never an exception; a pending
    confirmation is kept so the user can still answer it.
    """
    lang = state.language
    strings = STRINGS[lang]
    bumped = replace(state, turn_count=state.turn_count + 1)

    if not _normalized(text):
        return bumped, BotReply(text=strings["empty"], kind=KIND_CLARIFICATION)

    if state.phase == PHASE_AWAITING_CONFIRMATION:
        if is_affirmative(text, lang):
            return (
                replace(bumped, phase=PHASE_IDLE, candidate_intent=None),
                _answer(state.candidate_intent, kb, lang),
            )
        if is_negative(text, lang):
            return (
                replace(bumped, phase=PHASE_IDLE, candidate_intent=None),
                BotReply(text=strings["rephrase"], kind=KIND_CLARIFICATION),
            )
        bumped = replace(bumped, phase=PHASE_IDLE, candidate_intent=None)

    try:
        prediction = nlu.predict(text, lang)
    except EmptyInputError:
        return bumped, BotReply(text=strings["empty"], kind=KIND_CLARIFICATION)

    intent, confidence = prediction.top
    topic = kb.topic_of(intent) if kb.has(intent) else "out_of_scope"

    if topic == "out_of_scope":
        return bumped, BotReply(text=strings["handoff"], kind=KIND_HANDOFF)
    if topic == "small_talk":
        return bumped, BotReply(text=kb.answer(intent, lang), kind=KIND_SMALL_TALK)
    if confidence >= thresholds.direct:
        return bumped, _answer(intent, kb, lang)
    if confidence >= thresholds.confirm:
        confirm_text = strings["confirm"].format(question=kb.question(intent, lang))
        return (
            replace(bumped, phase=PHASE_AWAITING_CONFIRMATION, candidate_intent=intent),
            BotReply(text=confirm_text, kind=KIND_CONFIRMATION),
        )
    return bumped, BotReply(text=strings["handoff"], kind=KIND_HANDOFF)


def _answer(intent_id: str, kb: KnowledgeBase, language: str) -> BotReply:
    return BotReply(
        text=kb.answer(intent_id, language),
        kind=KIND_ANSWER,
        suggestions=tuple(suggest_related(intent_id, kb, language)),
    )
