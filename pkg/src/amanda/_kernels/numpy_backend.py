"""Pure-numpy implementations of the hot kernels.

Reference semantics for the compiled backend: both backends compute the
same float64 formulas and the parity tests hold them together to a few
ulps (they may differ in the last bits because libm and numpy's vectorized
transcendentals round differently).
"""

import numpy as np

NAME = "numpy"


def gru_gates_forward(gx, gh, b, h_prev):
    """Fused gated-recurrent-cell update from pre-computed projections.

    gx = x @ W and gh = h_prev @ U, both (batch, 3*d), laid out as the
    update / reset / candidate blocks; b is the (3*d,) bias.  The reset
    gate multiplies the hidden projection of the candidate block (the
    post-projection convention), which keeps the elementwise math cleanly
    separable from the matmuls.

    Returns (h, z, r, n); z/r/n are cached for the backward pass.
    """
    d = h_prev.shape[1]
    z = _sigmoid(gx[:, :d] + gh[:, :d] + b[:d])
    r = _sigmoid(gx[:, d : 2 * d] + gh[:, d : 2 * d] + b[d : 2 * d])
    n = np.tanh(gx[:, 2 * d :] + r * gh[:, 2 * d :] + b[2 * d :])
    h = (1.0 - z) * n + z * h_prev
    return h, z, r, n


def gru_gates_backward(dh, z, r, n, gh_n, h_prev):
    """Gradients of gru_gates_forward.

    dh is the gradient w.r.t. the new hidden state; gh_n is the candidate
    block gh[:, 2d:] saved from the forward pass.  Returns
    (dgx, dgh, db, dh_prev); the matmul gradients (to x, W, U) are handled
    by the caller from dgx / dgh.
    """
    dn = dh * (1.0 - z)
    dz = dh * (h_prev - n)
    dh_prev = dh * z

    da_n = dn * (1.0 - n * n)
    dr = da_n * gh_n
    dgh_n = da_n * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)

    dgx = np.concatenate([da_z, da_r, da_n], axis=1)
    dgh = np.concatenate([da_z, da_r, dgh_n], axis=1)
    db = dgx.sum(axis=0)
    return dgx, dgh, db, dh_prev


def overlap_add(frames, hop, out_len):
    """Accumulate windowed frames into a signal: out[t*hop + i] += frames[t, i]."""
    out = np.zeros(out_len, dtype=np.float64)
    n = frames.shape[1]
    for t in range(frames.shape[0]):
        start = t * hop
        out[start : start + n] += frames[t]
    return out


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
