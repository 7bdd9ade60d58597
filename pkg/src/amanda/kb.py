"""Multilingual FAQ knowledge base.

Entries pair an intent id with curated question/answer text in English
and Simplified Chinese plus up to three related intents for the
follow-up-suggestion feature.  The KB is immutable after load; answers
are served verbatim — nothing here generates medical content.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .nlu import LANGUAGES, TOPICS

MAX_RELATED = 3

BUNDLED_KB_PATH = Path(__file__).parent / "data" / "kb_demo.json"
BUNDLED_NLU_CORPUS_PATH = Path(__file__).parent / "data" / "nlu_demo.json"
BUNDLED_NLU_HELDOUT_PATH = Path(__file__).parent / "data" / "nlu_demo_heldout.json"

DEMO_DISCLAIMER = (
    "Demonstration knowledge base: illustrative content only, not clinically "
    "approved. Always confirm medical guidance with a healthcare professional."
)


class KbError(ValueError):
    pass


class KbParseError(KbError):
    pass


@dataclass(frozen=True)
class FaqEntry:
    intent_id: str
    topic: str
    question: dict  # language -> canonical question text
    answer: dict  # language -> approved answer text
    related: tuple = ()  # up to MAX_RELATED intent ids

    def __post_init__(self):
        object.__setattr__(self, "related", tuple(self.related))


@dataclass
class ValidationReport:
    problems: list

    @property
    def ok(self) -> bool:
        return not self.problems

    def __str__(self):
        return "KB valid" if self.ok else "\n".join(self.problems)


class KnowledgeBase:
    def __init__(self, entries):
        self.entries = {e.intent_id: e for e in entries}
        if len(self.entries) != len(entries):
            seen, dupes = set(), set()
            for e in entries:
                (dupes if e.intent_id in seen else seen).add(e.intent_id)
            raise KbError(f"duplicate intent ids: {sorted(dupes)}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())

    def has(self, intent_id: str) -> bool:
        return intent_id in self.entries

    def get(self, intent_id: str) -> FaqEntry | None:
        return self.entries.get(intent_id)

    def topic_of(self, intent_id: str) -> str:
        entry = self.entries.get(intent_id)
        if entry is None:
            raise KbError(f"unknown intent {intent_id!r}")
        return entry.topic

    def question(self, intent_id: str, language: str) -> str:
        return self.entries[intent_id].question[language]

    def answer(self, intent_id: str, language: str) -> str:
        return self.entries[intent_id].answer[language]


def load_kb(path) -> KnowledgeBase:
    """Parse and validate a KB file; malformed JSON reports line/position."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise KbParseError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(raw, list):
        raise KbParseError(f"{path}: expected a JSON array of entries")
    entries = []
    for i, item in enumerate(raw):
        try:
            entries.append(
                FaqEntry(
                    intent_id=item["intent_id"],
                    topic=item["topic"],
                    question=item["question"],
                    answer=item["answer"],
                    related=tuple(item.get("related", ())),
                )
            )
        except (KeyError, TypeError) as e:
            raise KbParseError(f"{path}: entry {i}: missing or malformed field: {e}") from e
    kb = KnowledgeBase(entries)
    report = validate_kb(kb)
    if not report.ok:
        raise KbError(f"{path}: invalid KB:\n{report}")
    return kb


def validate_kb(kb: KnowledgeBase) -> ValidationReport:
    """Check every entry invariant; names the offending entry ids."""
    problems = []
    for entry in kb:
        eid = entry.intent_id
        if entry.topic not in TOPICS:
            problems.append(f"{eid}: unknown topic {entry.topic!r}")
        for lang in LANGUAGES:
            for kind, table in (("question", entry.question), ("answer", entry.answer)):
                value = table.get(lang)
                if not isinstance(value, str) or not value.strip():
                    problems.append(f"{eid}: missing {lang} {kind} text")
        if len(entry.related) > MAX_RELATED:
            problems.append(f"{eid}: more than {MAX_RELATED} related intents")
        for rid in entry.related:
            if rid == eid:
                problems.append(f"{eid}: related list references itself")
            elif not kb.has(rid):
                problems.append(f"{eid}: dangling related id {rid!r}")
    return ValidationReport(problems)


def load_bundled_kb() -> KnowledgeBase:
    return load_kb(BUNDLED_KB_PATH)
