"""Finite-difference verification of reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, backward


@dataclass
class GradCheckReport:
    max_rel_err: float
    passed: bool
    worst_index: int

    def __bool__(self):
        return self.passed


def grad_check(f, at: Tensor, h: float = 1e-5, tol: float = 1e-4) -> GradCheckReport:
    """Compare the analytic gradient of f at `at` against central differences.

    f maps a Tensor to a scalar Tensor and must be deterministic; two
    forward passes that disagree raise.  Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1e-4): coordinates whose gradient magnitude
    sits below 1e-4 are compared on that absolute scale, which keeps
    finite-difference noise on near-zero gradients from drowning the check.
    """
    base = np.asarray(at.data, dtype=np.float64).copy()

    probe1 = f(Tensor(base.copy(), requires_grad=False)).item()
    probe2 = f(Tensor(base.copy(), requires_grad=False)).item()
    if probe1 != probe2:
        raise ValueError("grad_check: f is not deterministic (two passes disagree)")

    leaf = Tensor(base.copy(), requires_grad=True)
    out = f(leaf)
    backward(out)
    analytic = (
        leaf.grad.reshape(-1) if leaf.grad is not None else np.zeros(base.size)
    )

    flat = base.reshape(-1)
    numeric = np.empty_like(flat)
    work = flat.copy()
    for i in range(flat.size):
        orig = work[i]
        work[i] = orig + h
        fp = f(Tensor(work.reshape(base.shape))).item()
        work[i] = orig - h
        fm = f(Tensor(work.reshape(base.shape))).item()
        work[i] = orig
        numeric[i] = (fp - fm) / (2.0 * h)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-4)
    rel = np.abs(analytic - numeric) / denom
    worst = int(np.argmax(rel)) if rel.size else 0
    max_rel = float(rel[worst]) if rel.size else 0.0
    return GradCheckReport(max_rel_err=max_rel, passed=max_rel < tol, worst_index=worst)
