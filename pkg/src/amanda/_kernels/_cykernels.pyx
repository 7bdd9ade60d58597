# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fast paths for the recurrent-cell gate math and overlap-add.

Same contracts as numpy_backend; selected at import by amanda._kernels.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

NAME = "cython"


cdef inline double _sig(double x) nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def gru_gates_forward(object gx_o, object gh_o, object b_o, object h_prev_o):
    cdef double[:, ::1] gx = np.ascontiguousarray(gx_o, dtype=np.float64)
    cdef double[:, ::1] gh = np.ascontiguousarray(gh_o, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_o, dtype=np.float64)
    cdef double[:, ::1] h_prev = np.ascontiguousarray(h_prev_o, dtype=np.float64)

    cdef Py_ssize_t B = h_prev.shape[0]
    cdef Py_ssize_t d = h_prev.shape[1]

    h_np = np.empty((B, d), dtype=np.float64)
    z_np = np.empty((B, d), dtype=np.float64)
    r_np = np.empty((B, d), dtype=np.float64)
    n_np = np.empty((B, d), dtype=np.float64)
    cdef double[:, ::1] h = h_np
    cdef double[:, ::1] z = z_np
    cdef double[:, ::1] r = r_np
    cdef double[:, ::1] n = n_np

    cdef Py_ssize_t i, j
    cdef double zi, ri, ni
    with nogil:
        for i in range(B):
            for j in range(d):
                zi = _sig(gx[i, j] + gh[i, j] + b[j])
                ri = _sig(gx[i, d + j] + gh[i, d + j] + b[d + j])
                ni = tanh(gx[i, 2 * d + j] + ri * gh[i, 2 * d + j] + b[2 * d + j])
                z[i, j] = zi
                r[i, j] = ri
                n[i, j] = ni
                h[i, j] = (1.0 - zi) * ni + zi * h_prev[i, j]
    return h_np, z_np, r_np, n_np


def gru_gates_backward(object dh_o, object z_o, object r_o, object n_o,
                       object gh_n_o, object h_prev_o):
    cdef double[:, ::1] dh = np.ascontiguousarray(dh_o, dtype=np.float64)
    cdef double[:, ::1] z = np.ascontiguousarray(z_o, dtype=np.float64)
    cdef double[:, ::1] r = np.ascontiguousarray(r_o, dtype=np.float64)
    cdef double[:, ::1] n = np.ascontiguousarray(n_o, dtype=np.float64)
    cdef double[:, ::1] gh_n = np.ascontiguousarray(gh_n_o, dtype=np.float64)
    cdef double[:, ::1] h_prev = np.ascontiguousarray(h_prev_o, dtype=np.float64)

    cdef Py_ssize_t B = h_prev.shape[0]
    cdef Py_ssize_t d = h_prev.shape[1]

    dgx_np = np.empty((B, 3 * d), dtype=np.float64)
    dgh_np = np.empty((B, 3 * d), dtype=np.float64)
    db_np = np.zeros(3 * d, dtype=np.float64)
    dhp_np = np.empty((B, d), dtype=np.float64)
    cdef double[:, ::1] dgx = dgx_np
    cdef double[:, ::1] dgh = dgh_np
    cdef double[::1] db = db_np
    cdef double[:, ::1] dhp = dhp_np

    cdef Py_ssize_t i, j
    cdef double dni, dzi, da_n, dri, da_z, da_r
    with nogil:
        for i in range(B):
            for j in range(d):
                dni = dh[i, j] * (1.0 - z[i, j])
                dzi = dh[i, j] * (h_prev[i, j] - n[i, j])
                dhp[i, j] = dh[i, j] * z[i, j]

                da_n = dni * (1.0 - n[i, j] * n[i, j])
                dri = da_n * gh_n[i, j]
                da_z = dzi * z[i, j] * (1.0 - z[i, j])
                da_r = dri * r[i, j] * (1.0 - r[i, j])

                dgx[i, j] = da_z
                dgx[i, d + j] = da_r
                dgx[i, 2 * d + j] = da_n
                dgh[i, j] = da_z
                dgh[i, d + j] = da_r
                dgh[i, 2 * d + j] = da_n * r[i, j]
                db[j] += da_z
                db[d + j] += da_r
                db[2 * d + j] += da_n
    return dgx_np, dgh_np, db_np, dhp_np


def overlap_add(object frames_o, Py_ssize_t hop, Py_ssize_t out_len):
    cdef double[:, ::1] frames = np.ascontiguousarray(frames_o, dtype=np.float64)
    cdef Py_ssize_t T = frames.shape[0]
    cdef Py_ssize_t n = frames.shape[1]

    out_np = np.zeros(out_len, dtype=np.float64)
    cdef double[::1] out = out_np
    cdef Py_ssize_t t, i, start
    with nogil:
        for t in range(T):
            start = t * hop
            for i in range(n):
                out[start + i] += frames[t, i]
    return out_np
