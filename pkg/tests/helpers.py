"""Shared test oracles, independent of the library's own machinery."""

import numpy as np


def numeric_grad(f, arrays, which, h=1e-5):
    """Central-difference gradient of f(*arrays) w.r.t. arrays[which].

    f takes plain numpy arrays and returns a float.  Deliberately does not
    use the package's autograd or grad_check so it can serve as an
    independent oracle for both.
    """
    arrays = [np.array(a, dtype=np.float64) for a in arrays]
    target = arrays[which]
    grad = np.zeros_like(target)
    flat = target.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(*arrays)
        flat[i] = orig - h
        fm = f(*arrays)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def rel_err(a, b, floor=1e-4):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0
