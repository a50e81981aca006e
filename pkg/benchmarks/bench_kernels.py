#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times each hot kernel at production scale (80-token sequences, 200-dim
embeddings, 200 filters / 200 LSTM units) and a skip-gram epoch over a
synthetic corpus. Run:

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tweetpolarity.kernels import numpy_backend

try:
    from tweetpolarity.kernels import numba_backend
except ImportError:
    numba_backend = None


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _conv_case(rng):
    X = rng.standard_normal((80, 205)).astype(np.float32)
    W = (rng.standard_normal((200, 3, 205)) * 0.05).astype(np.float32)
    b = np.zeros(200, dtype=np.float32)
    dp = rng.standard_normal(200).astype(np.float32)
    return X, W, b, dp


def _lstm_case(rng):
    m, din, T = 200, 205, 80
    X = rng.standard_normal((T, din)).astype(np.float32)
    Wx = (rng.standard_normal((4 * m, din)) * 0.05).astype(np.float32)
    Wh = (rng.standard_normal((4 * m, m)) * 0.05).astype(np.float32)
    b = np.zeros(4 * m, dtype=np.float32)
    dh = rng.standard_normal(m).astype(np.float32)
    return X, Wx, Wh, b, dh


def _sg_case(rng):
    V, D, N = 5000, 200, 100_000
    tokens = rng.integers(2, V, size=N).astype(np.int32)
    offsets = np.arange(0, N + 1, 20, dtype=np.int64)
    Ein = ((rng.random((V, D)) - 0.5) / D).astype(np.float32)
    Eout = np.zeros((V, D), dtype=np.float32)
    table = rng.integers(2, V, size=1_000_000).astype(np.int32)
    keep = np.full(V, 0.9, dtype=np.float64)
    return tokens, offsets, Ein, Eout, table, keep


def bench(repeat: int) -> None:
    rng = np.random.default_rng(0)
    X, W, b, dp = _conv_case(rng)
    Xl, Wx, Wh, bl, dh = _lstm_case(rng)
    tokens, offsets, Ein, Eout, table, keep = _sg_case(rng)

    def make_cases(be, state0):
        pooled, argmax = be.conv_pool(X, W, b)
        H, C, G = be.lstm_forward(Xl, Wx, Wh, bl)
        return {
            "conv_pool fwd": lambda: be.conv_pool(X, W, b),
            "conv_pool bwd": lambda: be.conv_pool_backward(
                X, W, argmax, pooled, dp),
            "lstm fwd (T=80)": lambda: be.lstm_forward(Xl, Wx, Wh, bl),
            "lstm bwd (T=80)": lambda: be.lstm_backward(
                Xl, Wx, Wh, H, C, G, dh),
            "skipgram epoch (100k tok)": lambda: be.skipgram_epoch(
                tokens, offsets, Ein.copy(), Eout.copy(), table, keep,
                5, 5, 0.025, 1e-4, 0, 200_000, state0),
        }

    backends = [("numpy", numpy_backend, 42)]
    if numba_backend is not None:
        backends.append(("numba", numba_backend, np.uint64(42)))
    else:
        print("numba unavailable; timing the numpy fallback only")

    results: dict[str, dict[str, float]] = {}
    for name, be, state0 in backends:
        cases = make_cases(be, state0)
        for case_name, fn in cases.items():
            fn()  # warm-up (and numba compilation)
            results.setdefault(case_name, {})[name] = _time(fn, repeat)

    width = max(len(k) for k in results)
    header = f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for case_name, times in results.items():
        np_t = times["numpy"]
        if "numba" in times:
            nb_t = times["numba"]
            print(f"{case_name:<{width}}  {np_t * 1e3:>8.2f}ms  "
                  f"{nb_t * 1e3:>8.2f}ms  {np_t / nb_t:>7.1f}x")
        else:
            print(f"{case_name:<{width}}  {np_t * 1e3:>8.2f}ms")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    bench(ap.parse_args().repeat)
