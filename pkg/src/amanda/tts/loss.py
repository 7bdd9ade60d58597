"""Composite training loss: forward + backward reconstruction, refinement,
and the forward/backward state-consistency penalty."""

from __future__ import annotations

from dataclasses import dataclass

from amanda.nn import Tensor, ShapeError, add, mean_, mse, mul, neg, relu, scale, sub, sum_

DEFAULT_LAMBDA = 1.0


@dataclass
class TtsLoss:
    l_fwd: Tensor
    l_bwd: Tensor
    l_postnet: Tensor
    l_consistency: Tensor
    lam: float
    total: Tensor
    l_stop: Tensor | None = None  # auxiliary stop-gate BCE, not part of total

    def floats(self) -> dict:
        out = {
            "l_fwd": self.l_fwd.item(),
            "l_bwd": self.l_bwd.item(),
            "l_postnet": self.l_postnet.item(),
            "l_consistency": self.l_consistency.item(),
            "lambda": self.lam,
            "total": self.total.item(),
        }
        if self.l_stop is not None:
            out["l_stop"] = self.l_stop.item()
        return out


def _recon(pred: Tensor, target: Tensor, kind: str) -> Tensor:
    if kind == "mse":
        return mse(pred, target)
    if kind == "mae":
        diff = sub(pred, target)
        return mean_(add(relu(diff), relu(neg(diff))))
    raise ValueError(f"unknown loss kind {kind!r}")


def compute_loss(
    y: Tensor,
    y_fwd: Tensor,
    y_bwd: Tensor,
    mel_after: Tensor,
    s_fwd: Tensor,
    s_bwd: Tensor,
    lam: float = DEFAULT_LAMBDA,
    kind: str = "mse",
) -> TtsLoss:
    """Assemble the four-term training loss.

    All sequence arguments are (T_y, .) in forward time order: the caller
    re-reverses the backward decoder's frames and states before calling.
    Reconstruction terms average over frames and bins; the consistency
    term is the squared state distance summed over hidden units and
    averaged over time.  total = l_fwd + l_bwd + l_postnet + lam * l_c.
    """
    t_y = y.shape[0]
    for name, t in (("y_fwd", y_fwd), ("y_bwd", y_bwd), ("mel_after", mel_after)):
        if t.shape != y.shape:
            raise ShapeError(f"compute_loss: {name} shape {t.shape} != target {y.shape}")
    if s_fwd.shape != s_bwd.shape or s_fwd.shape[0] != t_y:
        raise ShapeError(
            f"compute_loss: state shapes {s_fwd.shape} vs {s_bwd.shape} (T_y={t_y})"
        )

    l_fwd = _recon(y_fwd, y, kind)
    l_bwd = _recon(y_bwd, y, kind)
    l_postnet = _recon(mel_after, y, kind)
    state_diff = sub(s_fwd, s_bwd)
    l_consistency = scale(sum_(mul(state_diff, state_diff)), 1.0 / t_y)
    total = add(add(add(l_fwd, l_bwd), l_postnet), scale(l_consistency, lam))
    return TtsLoss(
        l_fwd=l_fwd,
        l_bwd=l_bwd,
        l_postnet=l_postnet,
        l_consistency=l_consistency,
        lam=lam,
        total=total,
    )
