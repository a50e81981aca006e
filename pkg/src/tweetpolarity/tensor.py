"""Dense numeric primitives shared by the classifiers.

Arrays are plain numpy ndarrays: float32 during training, float64 inside
the finite-difference gradient checker. All functions are pure except
``adam_step``, which mutates its own state argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _check_shapes(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def affine(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """W @ x + b for a vector x."""
    _check_shapes(
        W.ndim == 2 and x.ndim == 1 and W.shape[1] == x.shape[0],
        f"affine shape mismatch: W {W.shape} vs x {x.shape}")
    _check_shapes(b.shape == (W.shape[0],),
                  f"affine bias mismatch: W {W.shape} vs b {b.shape}")
    return W @ x + b


def conv_seq(X: np.ndarray, w: np.ndarray, b: float) -> np.ndarray:
    """Relu convolution of one h-row filter over the token matrix X.

    Output length is X.shape[0] - h + 1: one value per window position.
    """
    h, d = w.shape
    _check_shapes(X.ndim == 2 and X.shape[1] == d,
                  f"conv_seq shape mismatch: X {X.shape} vs w {w.shape}")
    if h > X.shape[0]:
        raise ValueError(
            f"filter height {h} exceeds sequence length {X.shape[0]}")
    L = X.shape[0] - h + 1
    windows = np.lib.stride_tricks.sliding_window_view(X, (h, d))
    pre = windows.reshape(L, h * d) @ w.reshape(h * d) + b
    return np.maximum(pre, 0.0)


def max_over_time(c: np.ndarray) -> tuple[float, int]:
    """Maximum entry and its first index (ties break to the lowest index)."""
    if c.size == 0:
        raise ValueError("max_over_time of empty input")
    idx = int(np.argmax(c))
    return float(c[idx]), idx


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function, stable for large |x|."""
    x = np.asarray(x)
    out = np.empty_like(x, dtype=x.dtype if x.dtype.kind == "f" else np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def softmax_xent(logits: np.ndarray, label: int,
                 weight: float = 1.0) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted softmax cross-entropy.

    Returns (loss, probs, dlogits) with probs computed via max-subtraction
    and dlogits = weight * (probs - onehot(label)).
    """
    K = logits.shape[0]
    if not 0 <= label < K:
        raise ValueError(f"label {label} out of range for {K} classes")
    if weight <= 0:
        raise ValueError(f"weight must be positive, got {weight}")
    shifted = logits - logits.max()
    ex = np.exp(shifted)
    Z = ex.sum()
    probs = ex / Z
    loss = weight * (np.log(Z) - shifted[label])
    dlogits = weight * probs
    dlogits[label] -= weight
    return float(loss), probs, dlogits


def dropout(x: np.ndarray, p: float, rng: np.random.Generator,
            train: bool) -> tuple[np.ndarray, np.ndarray]:
    """Inverted dropout: survivors are scaled by 1/(1-p) at train time.

    Returns (y, mask) where mask is the multiplicative factor applied, so
    the backward pass is just grad * mask. Inference returns x unchanged
    with an all-ones mask.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if not train or p == 0.0:
        return x, np.ones_like(x)
    mask = (rng.random(x.shape) >= p).astype(x.dtype) / (1.0 - p)
    return x * mask, mask


@dataclass
class AdamState:
    """Per-parameter Adam accumulator; lr is mutable for schedule changes."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_param(cls, param: np.ndarray, lr: float = 0.001) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param), lr=lr)


def adam_step(param: np.ndarray, grad: np.ndarray,
              state: AdamState) -> np.ndarray:
    """One Adam update with bias correction; mutates param and state."""
    if param.shape != grad.shape or param.shape != state.m.shape:
        raise ValueError(
            f"adam shape mismatch: param {param.shape}, grad {grad.shape}, "
            f"state {state.m.shape}")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    mhat = state.m / (1.0 - state.beta1 ** state.t)
    vhat = state.v / (1.0 - state.beta2 ** state.t)
    param -= (state.lr * mhat / (np.sqrt(vhat) + state.eps)).astype(param.dtype)
    return param


def grad_check(f, param: np.ndarray, analytic_grad: np.ndarray,
               h: float = 1e-4, max_coords: int = 256,
               rng: np.random.Generator | None = None) -> float:
    """Central-difference check of an analytic gradient.

    f is a scalar function of param (param is restored after the call).
    For tensors with more than max_coords entries a random subset of
    coordinates is probed. Returns the max relative error
    |fd - g| / max(1, |fd| + |g|) over the probed coordinates.
    """
    flat = param.reshape(-1)
    gflat = analytic_grad.reshape(-1)
    n = flat.shape[0]
    if n > max_coords:
        if rng is None:
            rng = np.random.default_rng(0)
        coords = rng.choice(n, size=max(100, max_coords), replace=False)
    else:
        coords = np.arange(n)
    worst = 0.0
    for i in coords:
        orig = flat[i]
        flat[i] = orig + h
        f_plus = f()
        flat[i] = orig - h
        f_minus = f()
        flat[i] = orig
        fd = (f_plus - f_minus) / (2.0 * h)
        err = abs(fd - gflat[i]) / max(1.0, abs(fd) + abs(gflat[i]))
        if err > worst:
            worst = err
    return worst
