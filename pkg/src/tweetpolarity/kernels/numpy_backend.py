"""Pure-numpy implementations of the hot numeric kernels.

Every function here has a signature-identical twin in ``numba_backend``;
this module is the reference semantics and the fallback when numba is
unavailable or disabled via ``TWEETPOLARITY_BACKEND=numpy``.

Kernel inventory:
  - conv_pool / conv_pool_backward: relu convolution over a token matrix
    plus max-over-time pooling, for a stack of same-height filters.
  - lstm_forward / lstm_backward: full-sequence LSTM recurrence and its
    backpropagation-through-time, gradient taken at the final hidden state.
  - sgns_pair / skipgram_epoch: skip-gram negative-sampling updates.

The skip-gram path draws randomness from an explicit 64-bit LCG so that
both backends consume identical random streams.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

_MASK64 = (1 << 64) - 1
LCG_MULT = 25214903917
LCG_INC = 11


def lcg_next(state: int) -> int:
    return (state * LCG_MULT + LCG_INC) & _MASK64


def lcg_uniform(state: int) -> float:
    """Uniform in [0, 1) from the top bits of the state."""
    return ((state >> 40) & 0xFFFFFF) / 16777216.0


def lcg_randint(state: int) -> int:
    """Non-negative 31-bit integer from the state."""
    return (state >> 16) & 0x7FFFFFFF


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# convolution + max-over-time pooling


def conv_pool(X, W, b):
    """Forward pass for F filters of one height over the token matrix X.

    X: (S, D) input rows, W: (F, H, D) filters, b: (F,) biases.
    Returns (pooled (F,), argmax (F,) int64) where pooled[f] is the max of
    relu(conv) over the S-H+1 window positions and argmax[f] is the first
    position attaining it.
    """
    F, H, D = W.shape
    S = X.shape[0]
    L = S - H + 1
    windows = np.lib.stride_tricks.sliding_window_view(X, (H, D))
    windows = windows.reshape(L, H * D)
    pre = windows @ W.reshape(F, H * D).T + b
    c = np.maximum(pre, 0.0)
    argmax = c.argmax(axis=0)
    pooled = c[argmax, np.arange(F)]
    return pooled, argmax.astype(np.int64)


def conv_pool_backward(X, W, argmax, pooled, dpooled):
    """Backward of conv_pool. Gradient flows only through each filter's
    argmax window, and is killed where the pooled activation is zero."""
    F, H, D = W.shape
    dW = np.zeros_like(W)
    db = np.zeros_like(pooled)
    dX = np.zeros_like(X)
    for f in range(F):
        if pooled[f] <= 0.0:
            continue
        g = dpooled[f]
        if g == 0.0:
            continue
        i = argmax[f]
        db[f] = g
        dW[f] = g * X[i:i + H]
        dX[i:i + H] += g * W[f]
    return dW, db, dX


# ---------------------------------------------------------------------------
# LSTM sequence kernels (gate row order: input, forget, output, candidate)


def lstm_forward(X, Wx, Wh, b):
    """Run an LSTM over the whole sequence X (T, Din) from zero state.

    Wx: (4M, Din), Wh: (4M, M), b: (4M,) with gates stacked [i; f; o; g].
    Returns (H (T, M), C (T, M), G (T, 4M)) of hidden states, cell states
    and post-activation gate values.
    """
    T = X.shape[0]
    M = Wh.shape[1]
    H = np.zeros((T, M), dtype=X.dtype)
    C = np.zeros((T, M), dtype=X.dtype)
    G = np.zeros((T, 4 * M), dtype=X.dtype)
    XWx = X @ Wx.T
    h = np.zeros(M, dtype=X.dtype)
    c = np.zeros(M, dtype=X.dtype)
    for t in range(T):
        a = XWx[t] + Wh @ h + b
        i = _sigmoid(a[:M])
        f = _sigmoid(a[M:2 * M])
        o = _sigmoid(a[2 * M:3 * M])
        g = np.tanh(a[3 * M:])
        c = f * c + i * g
        h = o * np.tanh(c)
        G[t, :M] = i
        G[t, M:2 * M] = f
        G[t, 2 * M:3 * M] = o
        G[t, 3 * M:] = g
        C[t] = c
        H[t] = h
    return H, C, G


def lstm_backward(X, Wx, Wh, H, C, G, dh_last):
    """BPTT for lstm_forward with loss gradient dh_last at the final h.

    Returns (dX, dWx, dWh, db).
    """
    T, Din = X.shape
    M = Wh.shape[1]
    dA = np.zeros((T, 4 * M), dtype=X.dtype)
    dh = dh_last.astype(X.dtype).copy()
    dc = np.zeros(M, dtype=X.dtype)
    for t in range(T - 1, -1, -1):
        i = G[t, :M]
        f = G[t, M:2 * M]
        o = G[t, 2 * M:3 * M]
        g = G[t, 3 * M:]
        tc = np.tanh(C[t])
        c_prev = C[t - 1] if t > 0 else np.zeros(M, dtype=X.dtype)
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dA[t, :M] = di * i * (1.0 - i)
        dA[t, M:2 * M] = df * f * (1.0 - f)
        dA[t, 2 * M:3 * M] = do * o * (1.0 - o)
        dA[t, 3 * M:] = dg * (1.0 - g * g)
        dh = Wh.T @ dA[t]
        dc = dc * f
    H_prev = np.zeros_like(H)
    H_prev[1:] = H[:-1]
    dX = dA @ Wx
    dWx = dA.T @ X
    dWh = dA.T @ H_prev
    db = dA.sum(axis=0)
    return dX, dWx, dWh, db


# ---------------------------------------------------------------------------
# skip-gram with negative sampling


def _softplus(x: float) -> float:
    return np.log1p(np.exp(-abs(x))) + max(x, 0.0)


def _sig_scalar(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


def sgns_pair(Ein, Eout, center, targets, lr):
    """One positive + negatives update for a (center, context) pair.

    targets[0] is the context token; later entries are negative samples,
    with -1 marking a skipped draw. Updates Ein[center] and the touched
    Eout rows in place; returns the pair's logistic loss.
    """
    v = Ein[center]
    dv = np.zeros_like(v)
    loss = 0.0
    for k in range(targets.shape[0]):
        t = targets[k]
        if t < 0:
            continue
        u = Eout[t]
        z = float(np.dot(u, v))
        if k == 0:
            loss += _softplus(-z)
            gscale = 1.0 - _sig_scalar(z)
        else:
            loss += _softplus(z)
            gscale = -_sig_scalar(z)
        g = np.float32(gscale * lr)
        dv += g * u
        Eout[t] = u + g * v
    Ein[center] = v + dv
    return loss


def skipgram_epoch(tokens, offsets, Ein, Eout, table, keep, window, negatives,
                   lr_start, lr_min, scanned, total_scan, state):
    """One pass over the corpus: subsample, slide windows, update vectors.

    tokens: (N,) int32 token indices; offsets: (S+1,) int64 sentence bounds;
    table: (T,) int32 negative-sampling table; keep: (V,) float64 per-token
    keep probability. Returns (state, scanned, loss_sum, pairs).
    """
    state = int(state)
    scanned = int(scanned)
    total_scan = int(total_scan)
    tsize = table.shape[0]
    maxlen = 0
    for s in range(offsets.shape[0] - 1):
        maxlen = max(maxlen, int(offsets[s + 1] - offsets[s]))
    kept = np.empty(max(maxlen, 1), dtype=np.int64)
    targets = np.empty(negatives + 1, dtype=np.int64)
    loss_sum = 0.0
    pairs = 0
    for s in range(offsets.shape[0] - 1):
        lo = int(offsets[s])
        hi = int(offsets[s + 1])
        nk = 0
        for idx in range(lo, hi):
            tok = int(tokens[idx])
            state = lcg_next(state)
            scanned += 1
            if lcg_uniform(state) < keep[tok]:
                kept[nk] = tok
                nk += 1
        for ci in range(nk):
            center = int(kept[ci])
            state = lcg_next(state)
            bwin = 1 + lcg_randint(state) % window
            lr = lr_start * (1.0 - scanned / total_scan)
            if lr < lr_min:
                lr = lr_min
            for cj in range(max(0, ci - bwin), min(nk, ci + bwin + 1)):
                if cj == ci:
                    continue
                targets[0] = kept[cj]
                for n in range(negatives):
                    state = lcg_next(state)
                    t = int(table[lcg_randint(state) % tsize])
                    targets[n + 1] = -1 if t == targets[0] else t
                loss_sum += sgns_pair(Ein, Eout, center, targets, lr)
                pairs += 1
    return state, scanned, loss_sum, pairs
