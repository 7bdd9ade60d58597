"""Sequence-to-spectrogram TTS architecture.

A shared recurrent character encoder feeds content-based attention; two
gated recurrent decoders predict mel frames left-to-right (used at
inference) and right-to-left (training-time regularizer whose hidden
states are pulled toward the forward decoder's).  A small feed-forward
refinement stack adds a residual on top of the coarse decoder output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from amanda.nn import (
    Tensor,
    add,
    concat,
    gather_rows,
    gru_gates,
    init_uniform,
    load_checkpoint,
    matmul,
    reshape,
    save_checkpoint,
    slice_axis,
    softmax,
    tanh,
)
from .text import VOCAB_SIZE, TextSequence

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class TtsConfig:
    vocab_size: int = VOCAB_SIZE
    n_mels: int = 80
    d_emb: int = 32
    d_enc: int = 64
    d_dec: int = 64
    d_att: int = 64
    postnet_hidden: int = 64

    def to_dict(self):
        return {
            "vocab_size": self.vocab_size,
            "n_mels": self.n_mels,
            "d_emb": self.d_emb,
            "d_enc": self.d_enc,
            "d_dec": self.d_dec,
            "d_att": self.d_att,
            "postnet_hidden": self.postnet_hidden,
        }


@dataclass
class EncoderOutputs:
    h: Tensor  # (T_x, d_enc)

    @property
    def length(self) -> int:
        return self.h.shape[0]


@dataclass
class DecoderState:
    direction: str  # FORWARD or BACKWARD
    s: Tensor  # (1, d_dec)
    prev_frame: Tensor  # (1, n_mels)


@dataclass
class AttentionRecord:
    alpha: np.ndarray  # (T_y, T_x), rows sum to 1
    energies: np.ndarray  # (T_y, T_x)


def diagonal_attention_mass(alpha: np.ndarray, band: float = 0.2) -> float:
    """Fraction of alignment mass with |t/T_y - k/T_x| below `band`.

    1.0 means perfectly diagonal reading order; a flat alignment scores
    roughly the band coverage (~0.35-0.4 for typical shapes).
    """
    t_y, t_x = alpha.shape
    t_pos = np.arange(t_y)[:, None] / t_y
    k_pos = np.arange(t_x)[None, :] / t_x
    mask = np.abs(t_pos - k_pos) < band
    total = float(alpha.sum())
    return float(alpha[mask].sum()) / total if total > 0 else 0.0


@dataclass
class SynthesisOutput:
    mel_before: np.ndarray  # (T_y, n_mels)
    mel_after: np.ndarray
    residual: np.ndarray
    attention: AttentionRecord
    stop_step: int


class TtsModelParams:
    """All trainable tensors, addressable by name, plus the architecture config."""

    def __init__(self, config: TtsConfig, tensors: dict[str, Tensor]):
        self.config = config
        self.tensors = tensors
        expected = {name for name, _, _ in _param_layout(config)}
        if set(tensors) != expected:
            missing = expected - set(tensors)
            extra = set(tensors) - expected
            raise ValueError(f"parameter set mismatch: missing {missing}, extra {extra}")

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def parameters(self) -> list[Tensor]:
        return list(self.tensors.values())

    @classmethod
    def init(cls, config: TtsConfig = TtsConfig(), seed: int = 0) -> "TtsModelParams":
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, shape, fan_in in _param_layout(config):
            t = init_uniform(rng, shape, fan_in=fan_in)
            t.name = name
            tensors[name] = t
        return cls(config, tensors)

    def detached(self) -> "TtsModelParams":
        """Read-only view sharing storage; ops on it record no graph."""
        return TtsModelParams(
            self.config, {k: Tensor(v.data) for k, v in self.tensors.items()}
        )

    def flatten(self) -> np.ndarray:
        return np.concatenate([t.data.reshape(-1) for t in self.tensors.values()])

    def from_flat(self, flat: Tensor) -> "TtsModelParams":
        """Rebuild the named set as differentiable views of one flat tensor."""
        tensors = {}
        off = 0
        for name, t in self.tensors.items():
            size = t.size
            view = reshape(slice_axis(flat, 0, off, off + size), t.shape)
            tensors[name] = view
            off += size
        return TtsModelParams(self.config, tensors)

    def save(self, path, meta: dict | None = None) -> None:
        header = {"model": "tts", "config": self.config.to_dict()}
        header.update(meta or {})
        save_checkpoint(path, {k: v.data for k, v in self.tensors.items()}, header)

    @classmethod
    def load(cls, path) -> tuple["TtsModelParams", dict]:
        tensors, meta = load_checkpoint(path)
        config = TtsConfig(**meta["config"])
        params = {}
        for name, shape, _ in _param_layout(config):
            arr = tensors[name]
            if tuple(arr.shape) != tuple(shape):
                raise ValueError(f"{name}: checkpoint shape {arr.shape} != expected {shape}")
            t = Tensor(arr, requires_grad=True)
            t.name = name
            params[name] = t
        return cls(config, params), meta


def _param_layout(c: TtsConfig):
    """(name, shape, fan_in) for every trainable tensor, in fixed order."""
    dec_in = c.n_mels + c.d_enc
    out_in = c.d_dec + c.d_enc
    layout = [
        ("embedding", (c.vocab_size, c.d_emb), c.d_emb),
        ("enc.wx", (c.d_emb, 3 * c.d_enc), c.d_emb),
        ("enc.wh", (c.d_enc, 3 * c.d_enc), c.d_enc),
        ("enc.b", (3 * c.d_enc,), c.d_enc),
        ("att.ws", (c.d_dec, c.d_att), c.d_dec),
        ("att.wh", (c.d_enc, c.d_att), c.d_enc),
        ("att.b", (c.d_att,), c.d_att),
        ("att.v", (c.d_att, 1), c.d_att),
    ]
    for side in ("dec_fwd", "dec_bwd"):
        layout += [
            (f"{side}.wx", (dec_in, 3 * c.d_dec), dec_in),
            (f"{side}.wh", (c.d_dec, 3 * c.d_dec), c.d_dec),
            (f"{side}.b", (3 * c.d_dec,), c.d_dec),
            (f"{side}.frame_w", (out_in, c.n_mels), out_in),
            (f"{side}.frame_b", (c.n_mels,), out_in),
        ]
    layout += [
        ("stop.w", (out_in, 1), out_in),
        ("stop.b", (1,), out_in),
        ("post.w1", (c.n_mels, c.postnet_hidden), c.n_mels),
        ("post.b1", (c.postnet_hidden,), c.n_mels),
        ("post.w2", (c.postnet_hidden, c.n_mels), c.postnet_hidden),
        ("post.b2", (c.n_mels,), c.postnet_hidden),
    ]
    return layout


def _gru_step(x: Tensor, h_prev: Tensor, wx: Tensor, wh: Tensor, b: Tensor) -> Tensor:
    return gru_gates(matmul(x, wx), matmul(h_prev, wh), b, h_prev)


def encode(text: TextSequence, params: TtsModelParams) -> EncoderOutputs:
    """Run the shared recurrent encoder; row t depends only on ids[:t+1]."""
    c = params.config
    h = Tensor(np.zeros((1, c.d_enc)))
    rows = []
    for char_id in text.ids:
        e = gather_rows(params["embedding"], [int(char_id)])
        h = _gru_step(e, h, params["enc.wx"], params["enc.wh"], params["enc.b"])
        rows.append(h)
    return EncoderOutputs(h=concat(rows, axis=0))


def attention_projection(enc: EncoderOutputs, params: TtsModelParams) -> Tensor:
    """Encoder-side half of the additive score, reusable across decode steps."""
    return matmul(enc.h, params["att.wh"])


def attend(
    s_prev: DecoderState,
    enc: EncoderOutputs,
    params: TtsModelParams,
    enc_proj: Tensor | None = None,
):
    """Alignment weights and context for one decode step.

    Additive scoring v^T tanh(Ws s + Wh h_k + b) normalized by softmax;
    the context is the alignment-weighted sum of encoder rows.
    Returns (alpha_row (1, T_x), context (1, d_enc), energies (1, T_x)).
    """
    if enc_proj is None:
        enc_proj = attention_projection(enc, params)
    u = matmul(s_prev.s, params["att.ws"])  # (1, d_att)
    scores = tanh(add(add(enc_proj, u), params["att.b"]))  # (T_x, d_att)
    energies = reshape(matmul(scores, params["att.v"]), (1, enc.length))
    alpha = softmax(energies, axis=1)
    context = matmul(alpha, enc.h)
    return alpha, context, energies


def decode_step(
    s_prev: DecoderState,
    y_prev: Tensor,
    context: Tensor,
    params: TtsModelParams,
    direction: str,
):
    """One recurrent update plus frame and stop projections.

    The two directions share the encoder and attention scorer but own
    separate recurrent and frame-projection weights.
    """
    side = "dec_fwd" if direction == FORWARD else "dec_bwd"
    x = concat([y_prev, context], axis=1)
    s = _gru_step(x, s_prev.s, params[f"{side}.wx"], params[f"{side}.wh"], params[f"{side}.b"])
    sc = concat([s, context], axis=1)
    frame = add(matmul(sc, params[f"{side}.frame_w"]), params[f"{side}.frame_b"])
    stop_logit = add(matmul(sc, params["stop.w"]), params["stop.b"])
    new_state = DecoderState(direction=direction, s=s, prev_frame=frame)
    return new_state, frame, stop_logit


def postnet(mel_before: Tensor, params: TtsModelParams):
    """Frame-wise refinement: residual = W2 tanh(W1 y + b1) + b2, added to y."""
    hidden = tanh(add(matmul(mel_before, params["post.w1"]), params["post.b1"]))
    residual = add(matmul(hidden, params["post.w2"]), params["post.b2"])
    mel_after = add(mel_before, residual)
    return residual, mel_after


def initial_state(params: TtsModelParams, direction: str) -> DecoderState:
    c = params.config
    return DecoderState(
        direction=direction,
        s=Tensor(np.zeros((1, c.d_dec))),
        prev_frame=Tensor(np.zeros((1, c.n_mels))),
    )


def synthesize(text: TextSequence, params: TtsModelParams, max_frames: int = 400) -> SynthesisOutput:
    """Autoregressive inference with the forward decoder only.

    Each predicted frame is fed back as the next input; generation stops
    when the stop gate crosses 0.5 or at max_frames.
    """
    if max_frames < 1:
        raise ValueError(f"max_frames must be >= 1, got {max_frames}")
    frozen = params.detached()
    enc = encode(text, frozen)
    enc_proj = attention_projection(enc, frozen)
    state = initial_state(frozen, FORWARD)

    frames, alphas, energy_rows = [], [], []
    for _ in range(max_frames):
        alpha, context, energies = attend(state, enc, frozen, enc_proj)
        state, frame, stop_logit = decode_step(state, state.prev_frame, context, frozen, FORWARD)
        frames.append(frame.data[0])
        alphas.append(alpha.data[0])
        energy_rows.append(energies.data[0])
        if stop_logit.data[0, 0] > 0.0:  # sigmoid(logit) > 0.5
            break

    mel_before = Tensor(np.array(frames))
    residual, mel_after = postnet(mel_before, frozen)
    return SynthesisOutput(
        mel_before=mel_before.data,
        mel_after=mel_after.data,
        residual=residual.data,
        attention=AttentionRecord(alpha=np.array(alphas), energies=np.array(energy_rows)),
        stop_step=len(frames),
    )
