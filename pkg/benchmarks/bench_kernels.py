#!/usr/bin/env python3
"""Compare the compiled kernels against the numpy fallback.

Times the fused recurrent-gate forward/backward and the overlap-add
kernel at several shapes, plus one end-to-end toy training step per
backend.  Run after building the extension:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from amanda._kernels import numpy_backend

try:
    from amanda._kernels import _cykernels
except ImportError:
    _cykernels = None


def timeit(fn, *args, repeat=200):
    fn(*args)  # warm up
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat


def bench_gru(backend, batch, dim, rng):
    gx = rng.normal(size=(batch, 3 * dim))
    gh = rng.normal(size=(batch, 3 * dim))
    b = rng.normal(size=3 * dim)
    hp = rng.normal(size=(batch, dim))
    fwd = timeit(backend.gru_gates_forward, gx, gh, b, hp)
    h, z, r, n = backend.gru_gates_forward(gx, gh, b, hp)
    dh = rng.normal(size=(batch, dim))
    bwd = timeit(backend.gru_gates_backward, dh, z, r, n, gh[:, 2 * dim :], hp)
    return fwd, bwd


def bench_overlap_add(backend, frames, n_fft, hop, rng):
    data = rng.normal(size=(frames, n_fft))
    out_len = (frames - 1) * hop + n_fft
    return timeit(backend.overlap_add, data, hop, out_len, repeat=50)


def bench_train_step():
    from amanda.nn import AdamState, LrSchedule
    from amanda.tts import TtsModelParams, encode_text, toy_config, train_step
    from amanda.tts.train import make_toy_task

    task = make_toy_task(corpus_size=16, seed=0)
    params = TtsModelParams.init(toy_config(task), seed=1)
    opt = AdamState.for_params(params.parameters())
    sched = LrSchedule()
    batch = [(encode_text(s), m) for s, m in task.corpus[:8]]
    train_step(batch, params, opt, sched)  # warm up
    start = time.perf_counter()
    for _ in range(5):
        train_step(batch, params, opt, sched)
    return (time.perf_counter() - start) / 5


def main():
    rng = np.random.default_rng(0)
    backends = [("numpy", numpy_backend)]
    if _cykernels is not None:
        backends.append(("cython", _cykernels))
    else:
        print("compiled extension not built; showing numpy only\n")

    print(f"{'kernel':<34}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for batch, dim in [(1, 32), (8, 64), (32, 64), (32, 256)]:
        rows = {"fwd": [], "bwd": []}
        for _, backend in backends:
            fwd, bwd = bench_gru(backend, batch, dim, rng)
            rows["fwd"].append(fwd)
            rows["bwd"].append(bwd)
        for key, label in (("fwd", "forward"), ("bwd", "backward")):
            times = rows[key]
            speed = f"{times[0] / times[-1]:.2f}x" if len(times) > 1 else "-"
            print(
                f"gru_gates {label:<9} B={batch:<3} d={dim:<5}"
                + "".join(f"{t * 1e6:>10.1f}us" for t in times)
                + f"{speed:>10}"
            )
    for frames, n_fft, hop in [(40, 1024, 256), (200, 1024, 256)]:
        times = [bench_overlap_add(b, frames, n_fft, hop, rng) for _, b in backends]
        speed = f"{times[0] / times[-1]:.2f}x" if len(times) > 1 else "-"
        print(
            f"overlap_add T={frames:<4} n_fft={n_fft:<6}    "
            + "".join(f"{t * 1e6:>10.1f}us" for t in times)
            + f"{speed:>10}"
        )

    import os

    backend_name = os.environ.get("AMANDA_KERNEL_BACKEND", "auto")
    step = bench_train_step()
    print(f"\ntoy train_step (batch 8, backend={backend_name}): {step * 1e3:.1f} ms")
    print("re-run with AMANDA_KERNEL_BACKEND=numpy or =cython to force a backend")


if __name__ == "__main__":
    main()
