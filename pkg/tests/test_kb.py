import json

import pytest

from amanda.kb import (
    FaqEntry,
    KbError,
    KbParseError,
    KnowledgeBase,
    load_bundled_kb,
    load_kb,
    validate_kb,
)


def entry(intent_id="a", topic="diabetes_care", related=()):
    return FaqEntry(
        intent_id=intent_id,
        topic=topic,
        question={"en": f"Q {intent_id}?", "zh": f"问 {intent_id}？"},
        answer={"en": f"A {intent_id}.", "zh": f"答 {intent_id}。"},
        related=related,
    )


class TestValidation:
    def test_bundled_kb_validates_cleanly(self):
        kb = load_bundled_kb()
        assert validate_kb(kb).ok
        assert len(kb) >= 12

    def test_dangling_related_id_is_named(self):
        kb = KnowledgeBase([entry("a", related=("ghost",))])
        report = validate_kb(kb)
        assert not report.ok
        assert any("a: dangling related id 'ghost'" in p for p in report.problems)

    def test_self_reference_detected(self):
        report = validate_kb(KnowledgeBase([entry("a", related=("a",))]))
        assert any("references itself" in p for p in report.problems)

    def test_missing_translation_detected(self):
        bad = FaqEntry(
            intent_id="x",
            topic="diabetes_care",
            question={"en": "Q?"},  # zh missing
            answer={"en": "A.", "zh": "答。"},
        )
        report = validate_kb(KnowledgeBase([bad]))
        assert any("missing zh question" in p for p in report.problems)

    def test_too_many_related_detected(self):
        ids = [entry(c) for c in "bcde"]
        kb = KnowledgeBase(ids + [entry("a", related=("b", "c", "d", "e"))])
        report = validate_kb(kb)
        assert any("more than 3 related" in p for p in report.problems)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(KbError, match="duplicate"):
            KnowledgeBase([entry("a"), entry("a")])


class TestLoading:
    def test_empty_file_is_parse_error(self, tmp_path):
        path = tmp_path / "kb.json"
        path.write_text("", encoding="utf-8")
        with pytest.raises(KbParseError, match="line 1"):
            load_kb(path)

    def test_malformed_json_reports_position(self, tmp_path):
        path = tmp_path / "kb.json"
        path.write_text('[{"intent_id": "a",}]', encoding="utf-8")
        with pytest.raises(KbParseError, match=r"line \d+ column \d+"):
            load_kb(path)

    def test_non_array_rejected(self, tmp_path):
        path = tmp_path / "kb.json"
        path.write_text('{"intent_id": "a"}', encoding="utf-8")
        with pytest.raises(KbParseError, match="array"):
            load_kb(path)

    def test_invalid_kb_refused_at_load(self, tmp_path):
        path = tmp_path / "kb.json"
        path.write_text(
            json.dumps(
                [
                    {
                        "intent_id": "a",
                        "topic": "diabetes_care",
                        "question": {"en": "Q?", "zh": "问？"},
                        "answer": {"en": "A.", "zh": "答。"},
                        "related": ["missing"],
                    }
                ]
            ),
            encoding="utf-8",
        )
        with pytest.raises(KbError, match="dangling"):
            load_kb(path)

    def test_round_trip_of_bundled_file(self):
        kb = load_bundled_kb()
        assert kb.question("what_is_diabetes", "en") == "What is diabetes?"
        assert kb.topic_of("greeting") == "small_talk"
        assert kb.answer("greeting", "zh").startswith("你好")


def test_related_lookups():
    kb = load_bundled_kb()
    e = kb.get("what_is_diabetes")
    assert 1 <= len(e.related) <= 3
    for rid in e.related:
        assert kb.has(rid)
