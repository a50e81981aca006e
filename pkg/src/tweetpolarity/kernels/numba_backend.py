"""Numba-compiled implementations of the hot numeric kernels.

Signature-identical twins of ``numpy_backend``; see that module for the
kernel contracts. Loops are written out explicitly so numba can fuse them;
``cache=True`` persists the compiled artifacts next to this file.

The skip-gram LCG runs on uint64 throughout: callers must pass the state
as ``np.uint64`` so shifts never sign-extend.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

_U = np.uint64


@njit(cache=True)
def lcg_next(state):
    return _U(state) * _U(25214903917) + _U(11)


@njit(cache=True)
def lcg_uniform(state):
    return np.float64((_U(state) >> _U(40)) & _U(0xFFFFFF)) / 16777216.0


@njit(cache=True)
def lcg_randint(state):
    return np.int64((_U(state) >> _U(16)) & _U(0x7FFFFFFF))


@njit(cache=True)
def _sig(x):
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    ex = np.exp(x)
    return ex / (1.0 + ex)


@njit(cache=True)
def _softplus(x):
    return np.log1p(np.exp(-abs(x))) + max(x, 0.0)


# ---------------------------------------------------------------------------
# convolution + max-over-time pooling


@njit(cache=True)
def conv_pool(X, W, b):
    F, H, D = W.shape
    S = X.shape[0]
    L = S - H + 1
    pooled = np.zeros(F, dtype=X.dtype)
    argmax = np.zeros(F, dtype=np.int64)
    for f in range(F):
        best = 0.0
        besti = 0
        first = True
        for i in range(L):
            acc = 0.0
            for j in range(H):
                for k in range(D):
                    acc += W[f, j, k] * X[i + j, k]
            c = acc + b[f]
            if c < 0.0:
                c = 0.0
            if first or c > best:
                best = c
                besti = i
                first = False
        pooled[f] = best
        argmax[f] = besti
    return pooled, argmax


@njit(cache=True)
def conv_pool_backward(X, W, argmax, pooled, dpooled):
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
        for j in range(H):
            for k in range(D):
                dW[f, j, k] = g * X[i + j, k]
                dX[i + j, k] += g * W[f, j, k]
    return dW, db, dX


# ---------------------------------------------------------------------------
# LSTM sequence kernels (gate row order: input, forget, output, candidate)


@njit(cache=True)
def lstm_forward(X, Wx, Wh, b):
    T = X.shape[0]
    M = Wh.shape[1]
    H = np.zeros((T, M), dtype=X.dtype)
    C = np.zeros((T, M), dtype=X.dtype)
    G = np.zeros((T, 4 * M), dtype=X.dtype)
    h = np.zeros(M, dtype=X.dtype)
    c = np.zeros(M, dtype=X.dtype)
    XWx = np.dot(X, np.ascontiguousarray(Wx.T))
    for t in range(T):
        a = XWx[t] + np.dot(Wh, h) + b
        for m in range(M):
            i = _sig(float(a[m]))
            f = _sig(float(a[M + m]))
            o = _sig(float(a[2 * M + m]))
            g = np.tanh(float(a[3 * M + m]))
            cn = f * c[m] + i * g
            hn = o * np.tanh(cn)
            G[t, m] = i
            G[t, M + m] = f
            G[t, 2 * M + m] = o
            G[t, 3 * M + m] = g
            C[t, m] = cn
            H[t, m] = hn
            c[m] = cn
            h[m] = hn
    return H, C, G


@njit(cache=True)
def lstm_backward(X, Wx, Wh, H, C, G, dh_last):
    T = X.shape[0]
    M = Wh.shape[1]
    dA = np.zeros((T, 4 * M), dtype=X.dtype)
    dh = dh_last.astype(X.dtype)
    dc = np.zeros(M, dtype=X.dtype)
    WhT = np.ascontiguousarray(Wh.T)
    for t in range(T - 1, -1, -1):
        for m in range(M):
            i = G[t, m]
            f = G[t, M + m]
            o = G[t, 2 * M + m]
            g = G[t, 3 * M + m]
            tc = np.tanh(C[t, m])
            c_prev = C[t - 1, m] if t > 0 else 0.0
            do = dh[m] * tc
            dcm = dc[m] + dh[m] * o * (1.0 - tc * tc)
            di = dcm * g
            dg = dcm * i
            df = dcm * c_prev
            dA[t, m] = di * i * (1.0 - i)
            dA[t, M + m] = df * f * (1.0 - f)
            dA[t, 2 * M + m] = do * o * (1.0 - o)
            dA[t, 3 * M + m] = dg * (1.0 - g * g)
            dc[m] = dcm * f
        dh = np.dot(WhT, dA[t])
    H_prev = np.zeros_like(H)
    H_prev[1:] = H[:-1]
    dAT = np.ascontiguousarray(dA.T)
    dX = np.dot(dA, Wx)
    dWx = np.dot(dAT, X)
    dWh = np.dot(dAT, H_prev)
    db = dA.sum(axis=0)
    return dX, dWx, dWh, db


# ---------------------------------------------------------------------------
# skip-gram with negative sampling


@njit(cache=True)
def sgns_pair(Ein, Eout, center, targets, lr):
    D = Ein.shape[1]
    v = Ein[center]
    dv = np.zeros(D, dtype=Ein.dtype)
    loss = 0.0
    for k in range(targets.shape[0]):
        t = targets[k]
        if t < 0:
            continue
        z = 0.0
        for d in range(D):
            z += Eout[t, d] * v[d]
        if k == 0:
            loss += _softplus(-z)
            gscale = 1.0 - _sig(z)
        else:
            loss += _softplus(z)
            gscale = -_sig(z)
        g = np.float32(gscale * lr)
        for d in range(D):
            u_old = Eout[t, d]
            dv[d] += g * u_old
            Eout[t, d] = u_old + g * v[d]
    for d in range(D):
        Ein[center, d] = v[d] + dv[d]
    return loss


@njit(cache=True)
def skipgram_epoch(tokens, offsets, Ein, Eout, table, keep, window, negatives,
                   lr_start, lr_min, scanned, total_scan, state):
    tsize = table.shape[0]
    maxlen = 1
    for s in range(offsets.shape[0] - 1):
        ln = int(offsets[s + 1] - offsets[s])
        if ln > maxlen:
            maxlen = ln
    kept = np.empty(maxlen, dtype=np.int64)
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
                    if t == targets[0]:
                        targets[n + 1] = -1
                    else:
                        targets[n + 1] = t
                loss_sum += sgns_pair(Ein, Eout, center, targets, lr)
                pairs += 1
    return state, scanned, loss_sum, pairs
