"""Adam optimizer and the learning-rate schedule used for TTS training."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class LrSchedule:
    """Constant learning rate up to decay_start_step, then decay.

    The default rule halves the rate every `halflife` steps past the decay
    start, so the rate is exactly initial_lr through step decay_start_step
    and strictly below it from the next step on.
    """

    initial_lr: float = 1e-3
    decay_start_step: int = 5000
    decay_rule: str = "exp_halflife"  # or "constant"
    halflife: float = 25000.0

    def __post_init__(self):
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")
        if self.decay_rule not in ("exp_halflife", "constant"):
            raise ValueError(f"unknown decay_rule {self.decay_rule!r}")

    def at(self, step: int) -> float:
        """Effective learning rate for optimizer step number `step` (1-based)."""
        if self.decay_rule == "constant" or step <= self.decay_start_step:
            return self.initial_lr
        return self.initial_lr * 0.5 ** ((step - self.decay_start_step) / self.halflife)


@dataclass
class AdamState:
    """Per-parameter first/second moment estimates and the step counter."""

    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params, **kwargs) -> "AdamState":
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
            **kwargs,
        )


def adam_step(params, grads, state: AdamState, sched: LrSchedule) -> None:
    """One Adam update, in place.  grads=None pulls gradients from p.grad."""
    params = list(params)
    if grads is None:
        grads = [p.grad for p in params]
    grads = [g if g is not None else np.zeros_like(p.data) for p, g in zip(params, grads)]
    if len(grads) != len(params):
        raise ValueError("adam_step: params and grads length mismatch")
    if not state.m:
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]

    state.step += 1
    lr = sched.at(state.step)
    b1, b2, eps = state.beta1, state.beta2, state.epsilon
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if g.shape != p.data.shape:
            raise ValueError(f"adam_step: grad shape {g.shape} != param shape {p.data.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def zero_grads(params) -> None:
    for p in params:
        p.grad = None


def init_uniform(rng: np.random.Generator, shape, fan_in: int | None = None) -> Tensor:
    """Trainable tensor with entries uniform in +-1/sqrt(fan_in)."""
    if fan_in is None:
        fan_in = shape[0] if len(shape) > 1 else shape[0]
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)
