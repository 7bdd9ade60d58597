"""Trainable intent classifier with calibrated confidences.

English text is lowercased, punctuation-stripped and whitespace-split;
Chinese is tokenized per character.  Features are a hashed bag of
unigrams and bigrams (bigrams keep "high blood sugar" away from "low
blood sugar"), L2-normalized.  A multinomial softmax regression fit by
full-batch gradient descent produces the ranked intent distribution.
"""

from __future__ import annotations

import json
import re
import unicodedata
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from amanda.nn import (
    Tensor,
    backward,
    load_checkpoint,
    matmul,
    save_checkpoint,
    softmax_cross_entropy,
    add,
)

HASH_DIM = 2**15
TOPICS = ("diabetes_care", "glucose_monitoring", "complications", "small_talk", "out_of_scope")
LANGUAGES = ("en", "zh")

_EN_TOKEN = re.compile(r"[a-z0-9']+")
_NUMBER = re.compile(r"\d+(?:\.\d+)?")


class NluError(ValueError):
    pass


class EmptyInputError(NluError):
    pass


@dataclass(frozen=True)
class IntentLabel:
    id: str
    topic: str

    def __post_init__(self):
        if self.topic not in TOPICS:
            raise NluError(f"unknown topic {self.topic!r} for intent {self.id!r}")


@dataclass(frozen=True)
class TrainingExample:
    text: str
    language: str
    intent: str

    def __post_init__(self):
        if not self.text.strip():
            raise NluError("training example text must be non-empty")
        if self.language not in LANGUAGES:
            raise NluError(f"unsupported language {self.language!r}")


@dataclass
class IntentPrediction:
    ranked: list  # (intent id, confidence), sorted descending
    numbers: list = field(default_factory=list)  # numeric values found in the text

    @property
    def top(self):
        return self.ranked[0]

    @property
    def top_intent(self) -> str:
        return self.ranked[0][0]

    @property
    def top_confidence(self) -> float:
        return self.ranked[0][1]


def tokenize(text: str, language: str) -> list:
    """en: lowercased word tokens; zh: one token per non-space character."""
    if language == "en":
        return _EN_TOKEN.findall(text.lower())
    if language == "zh":
        return [
            ch
            for ch in text.strip()
            if not ch.isspace() and not unicodedata.category(ch).startswith("P")
        ]
    raise NluError(f"unsupported language {language!r}")


def _hash_token(token: str) -> int:
    return zlib.crc32(token.encode("utf-8")) % HASH_DIM


def featurize(tokens) -> np.ndarray:
    """Hashed unigram+bigram counts, L2-normalized when nonzero."""
    vec = np.zeros(HASH_DIM)
    for tok in tokens:
        vec[_hash_token(tok)] += 1.0
    for a, b in zip(tokens, tokens[1:]):
        vec[_hash_token(a + "\x1f" + b)] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def extract_numbers(text: str) -> list:
    return [float(m) for m in _NUMBER.findall(text)]


@dataclass
class IntentClassifier:
    labels: list  # IntentLabel, index order defines the logit columns
    weights: np.ndarray  # (HASH_DIM, n_intents)
    bias: np.ndarray  # (n_intents,)

    def predict(self, text: str, language: str) -> IntentPrediction:
        return predict_intent(text, language, self)

    def topic_of(self, intent_id: str) -> str:
        for label in self.labels:
            if label.id == intent_id:
                return label.topic
        raise NluError(f"unknown intent {intent_id!r}")

    def save(self, path) -> None:
        save_checkpoint(
            path,
            {"weights": self.weights, "bias": self.bias},
            {
                "model": "nlu",
                "hash_dim": HASH_DIM,
                "labels": [{"id": l.id, "topic": l.topic} for l in self.labels],
            },
        )

    @classmethod
    def load(cls, path) -> "IntentClassifier":
        tensors, meta = load_checkpoint(path)
        if meta.get("model") != "nlu":
            raise NluError(f"{path}: not an intent-classifier checkpoint")
        labels = [IntentLabel(d["id"], d["topic"]) for d in meta["labels"]]
        return cls(labels=labels, weights=tensors["weights"], bias=tensors["bias"])


def train_intents(
    examples,
    labels,
    epochs: int = 400,
    lr: float = 4.0,
) -> IntentClassifier:
    """Fit softmax-regression weights by full-batch gradient descent.

    Deterministic: weights start at zero and examples enter in list order.
    Requires at least two distinct intents, each with at least one example.
    """
    examples = list(examples)
    labels = list(labels)
    label_index = {l.id: i for i, l in enumerate(labels)}
    if len(label_index) < 2:
        raise NluError("need at least two distinct intents to train")
    seen = {ex.intent for ex in examples}
    missing = [l.id for l in labels if l.id not in seen]
    if missing:
        raise NluError(f"intents without any training example: {missing}")
    unknown = seen - set(label_index)
    if unknown:
        raise NluError(f"examples reference unknown intents: {sorted(unknown)}")

    x = np.stack([featurize(tokenize(ex.text, ex.language)) for ex in examples])
    y = np.array([label_index[ex.intent] for ex in examples], dtype=np.int64)

    w = Tensor(np.zeros((HASH_DIM, len(labels))), requires_grad=True)
    b = Tensor(np.zeros(len(labels)), requires_grad=True)
    xt = Tensor(x)
    for _ in range(epochs):
        w.zero_grad()
        b.zero_grad()
        loss = softmax_cross_entropy(add(matmul(xt, w), b), y)
        backward(loss)
        w.data -= lr * w.grad
        b.data -= lr * b.grad
    return IntentClassifier(labels=labels, weights=w.data, bias=b.data)


def training_loss(classifier: IntentClassifier, examples) -> float:
    x = np.stack([featurize(tokenize(ex.text, ex.language)) for ex in examples])
    idx = {l.id: i for i, l in enumerate(classifier.labels)}
    y = np.array([idx[ex.intent] for ex in examples], dtype=np.int64)
    logits = Tensor(x @ classifier.weights + classifier.bias)
    return softmax_cross_entropy(logits, y).item()


def predict_intent(text: str, language: str, classifier: IntentClassifier) -> IntentPrediction:
    """Ranked intent distribution for one utterance.

    Raises EmptyInputError for blank text (the dialogue layer turns that
    into a clarification prompt rather than an exception to the user).
    """
    if not text or not text.strip():
        raise EmptyInputError("empty input")
    feats = featurize(tokenize(text, language))
    logits = feats @ classifier.weights + classifier.bias
    shifted = np.exp(logits - logits.max())
    probs = shifted / shifted.sum()
    order = np.argsort(-probs, kind="stable")
    ranked = [(classifier.labels[i].id, float(probs[i])) for i in order]
    return IntentPrediction(ranked=ranked, numbers=extract_numbers(text))


def load_training_corpus(path, kb=None):
    """Read a training corpus file into (examples, labels).

    Accepts the plain interchange format (a UTF-8 JSON array of
    {text, language, intent} objects) or an object form carrying an
    explicit `intents`: [{id, topic}] table next to `examples`.  For the
    plain form, topics come from the knowledge base when one is given;
    otherwise the literal id "out_of_scope" maps to that topic and the
    rest default to diabetes_care.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(raw, dict):
        labels = [IntentLabel(d["id"], d["topic"]) for d in raw["intents"]]
        entries = raw["examples"]
    else:
        entries = raw
        labels = None
    examples = [TrainingExample(d["text"], d["language"], d["intent"]) for d in entries]
    if labels is None:
        ids = sorted({ex.intent for ex in examples})
        labels = []
        for intent_id in ids:
            if kb is not None and kb.has(intent_id):
                topic = kb.topic_of(intent_id)
            elif intent_id == "out_of_scope":
                topic = "out_of_scope"
            else:
                topic = "diabetes_care"
            labels.append(IntentLabel(intent_id, topic))
    return examples, labels
