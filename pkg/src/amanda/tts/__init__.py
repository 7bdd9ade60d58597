"""Sequence-to-spectrogram TTS: model, losses, training, synthesis."""

from .loss import DEFAULT_LAMBDA, TtsLoss, compute_loss
from .model import (
    BACKWARD,
    FORWARD,
    AttentionRecord,
    diagonal_attention_mass,
    DecoderState,
    EncoderOutputs,
    SynthesisOutput,
    TtsConfig,
    TtsModelParams,
    attend,
    decode_step,
    encode,
    postnet,
    synthesize,
)
from .text import TextSequence, VOCAB, VOCAB_SIZE, decode_ids, encode_text
from .train import (
    ToyTask,
    TrainingDivergedError,
    load_corpus_dir,
    make_toy_task,
    sample_loss,
    split_corpus,
    toy_config,
    train_on_pairs,
    train_step,
    train_toy_copy_task,
)

__all__ = [
    "AttentionRecord",
    "BACKWARD",
    "DEFAULT_LAMBDA",
    "DecoderState",
    "EncoderOutputs",
    "FORWARD",
    "SynthesisOutput",
    "TextSequence",
    "ToyTask",
    "TrainingDivergedError",
    "TtsConfig",
    "TtsLoss",
    "TtsModelParams",
    "VOCAB",
    "VOCAB_SIZE",
    "attend",
    "compute_loss",
    "decode_ids",
    "decode_step",
    "diagonal_attention_mass",
    "encode",
    "encode_text",
    "load_corpus_dir",
    "make_toy_task",
    "postnet",
    "sample_loss",
    "split_corpus",
    "synthesize",
    "toy_config",
    "train_on_pairs",
    "train_step",
    "train_toy_copy_task",
]
