"""Finite-difference verification of every backward pass.

Small double-precision model instances are built from a seed, dropout
masks are pinned by reseeding the generator per forward call, and each
parameter group's analytic gradient is compared against central
differences. Used by the `gradcheck` CLI subcommand and the acceptance
suite.
"""

from __future__ import annotations

import numpy as np

from .corpus import Vocabulary, build_vocab
from .models import (BiLstmParams, CnnParams, EmbeddingMatrix, LstmCellParams,
                     bilstm_backward, bilstm_forward, cnn_backward,
                     cnn_forward, embed, embed_backward, lstm_cell,
                     lstm_cell_backward, rnn_cell, rnn_cell_backward)
from .tensor import grad_check, softmax_xent
from .text import TokenizedTweet

TOLERANCE = 1e-3


def _tiny_vocab() -> Vocabulary:
    return build_vocab([["alpha", "beta", "gamma", "delta", "topicword"]],
                       min_count=1)


def _tiny_tweet() -> TokenizedTweet:
    return TokenizedTweet(tokens=["alpha", "beta", "gamma", "delta"],
                          topic_flags=[False, True, False, False])


def _rand(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.uniform(-0.5, 0.5, size=shape)


def _tiny_emb(rng: np.random.Generator, vocab: Vocabulary, d: int) -> EmbeddingMatrix:
    E = _rand(rng, len(vocab), d)
    E[0] = 0.0
    return EmbeddingMatrix(E=E, topic_vecs=_rand(rng, 2, 5))


def cnn_gradcheck(seed: int, h: float = 1e-4) -> dict[str, float]:
    """Full CNN pipeline (embed -> conv/pool -> head -> weighted xent) at
    d=4, s'=6, two filters per size in {1,2,3}, topic channel on."""
    rng = np.random.default_rng(seed)
    vocab = _tiny_vocab()
    d = 4
    emb = _tiny_emb(rng, vocab, d)
    d_in = d + 5
    params = CnnParams(
        filters={hh: _rand(rng, 2, hh, d_in) for hh in (1, 2, 3)},
        biases={hh: _rand(rng, 2) for hh in (1, 2, 3)},
        W_hidden=_rand(rng, 4, 6), b_hidden=_rand(rng, 4),
        W_out=_rand(rng, 3, 4), b_out=_rand(rng, 3),
        s_prime=6, dropout_p=0.5)
    tweet = _tiny_tweet()
    label, weight = 1, 1.7
    mask_seed = seed + 900

    def run():
        drop_rng = np.random.default_rng(mask_seed)
        X, ec = embed(tweet, emb, vocab, use_topic=True, s_prime=6)
        probs, cache = cnn_forward(X, params, drop_rng, train=True)
        loss, _, dlogits = softmax_xent(cache.logits, label, weight)
        return loss, cache, dlogits, ec

    loss, cache, dlogits, ec = run()
    grads, dX = cnn_backward(cache, params, dlogits)
    grads.update(embed_backward(ec, dX, emb))
    f = lambda: run()[0]
    groups = dict(params.param_dict())
    groups.update(emb.param_dict())
    return {name: grad_check(f, arr, grads[name], h=h)
            for name, arr in groups.items()}


def bilstm_gradcheck(seed: int, h: float = 1e-4) -> dict[str, float]:
    """Full BiLSTM pipeline at d=4, m=3, 4 tokens, topic channel on."""
    rng = np.random.default_rng(seed)
    vocab = _tiny_vocab()
    d = 4
    m = 3
    emb = _tiny_emb(rng, vocab, d)
    d_in = d + 5
    params = BiLstmParams(
        fwd=LstmCellParams(Wx=_rand(rng, 4 * m, d_in),
                           Wh=_rand(rng, 4 * m, m), b=_rand(rng, 4 * m)),
        bwd=LstmCellParams(Wx=_rand(rng, 4 * m, d_in),
                           Wh=_rand(rng, 4 * m, m), b=_rand(rng, 4 * m)),
        W_hidden=_rand(rng, 4, 2 * m), b_hidden=_rand(rng, 4),
        W_out=_rand(rng, 3, 4), b_out=_rand(rng, 3),
        s_prime=6, dropout_p=0.5)
    tweet = _tiny_tweet()
    label, weight = 2, 0.8
    mask_seed = seed + 901

    def run():
        drop_rng = np.random.default_rng(mask_seed)
        X, ec = embed(tweet, emb, vocab, use_topic=True, s_prime=6)
        probs, cache = bilstm_forward(X, len(tweet.tokens), params,
                                      drop_rng, train=True)
        loss, _, dlogits = softmax_xent(cache.logits, label, weight)
        return loss, cache, dlogits, ec

    loss, cache, dlogits, ec = run()
    grads, dX = bilstm_backward(cache, params, dlogits)
    grads.update(embed_backward(ec, dX, emb))
    f = lambda: run()[0]
    groups = dict(params.param_dict())
    groups.update(emb.param_dict())
    return {name: grad_check(f, arr, grads[name], h=h)
            for name, arr in groups.items()}


def lstm_cell_gradcheck(seed: int, h: float = 1e-5) -> float:
    """Single LSTM step wrt all weights and both carried states."""
    rng = np.random.default_rng(seed)
    m, d_in = 3, 4
    cell = LstmCellParams(Wx=_rand(rng, 4 * m, d_in), Wh=_rand(rng, 4 * m, m),
                          b=_rand(rng, 4 * m))
    x = _rand(rng, d_in)
    h_prev = _rand(rng, m)
    c_prev = _rand(rng, m)
    w = _rand(rng, m)  # random projection makes the loss scalar

    def run():
        h_t, c_t, cache = lstm_cell(x, h_prev, c_prev, cell)
        return float(w @ h_t), cache

    _, cache = run()
    dx, dh_prev, dc_prev, dWx, dWh, db = lstm_cell_backward(
        cache, cell, dh=w.copy(), dc=np.zeros(m))
    f = lambda: run()[0]
    worst = 0.0
    for arr, g in ((cell.Wx, dWx), (cell.Wh, dWh), (cell.b, db),
                   (x, dx), (h_prev, dh_prev), (c_prev, dc_prev)):
        worst = max(worst, grad_check(f, arr, g, h=h))
    return worst


def rnn_cell_gradcheck(seed: int, h: float = 1e-5) -> float:
    rng = np.random.default_rng(seed)
    m, d_in = 3, 4
    W = _rand(rng, m, d_in)
    U = _rand(rng, m, m)
    b = _rand(rng, m)
    x = _rand(rng, d_in)
    h_prev = _rand(rng, m)
    w = _rand(rng, m)

    def run():
        h_t, cache = rnn_cell(x, h_prev, W, U, b)
        return float(w @ h_t), cache

    _, cache = run()
    dx, dh_prev, dW, dU, db = rnn_cell_backward(cache, W, U, w.copy())
    f = lambda: run()[0]
    worst = 0.0
    for arr, g in ((W, dW), (U, dU), (b, db), (x, dx), (h_prev, dh_prev)):
        worst = max(worst, grad_check(f, arr, g, h=h))
    return worst


def softmax_gradcheck(seed: int, h: float = 1e-6) -> float:
    rng = np.random.default_rng(seed)
    logits = _rand(rng, 5) * 4.0
    label, weight = int(rng.integers(5)), 1.3
    _, _, dlogits = softmax_xent(logits, label, weight)
    f = lambda: softmax_xent(logits, label, weight)[0]
    return grad_check(f, logits, dlogits, h=h)


def run_suite(base_seed: int = 0, seeds: int = 20) -> list[tuple[str, float]]:
    """Worst relative error per check over the seed range."""
    rows = []
    worst_cnn: dict[str, float] = {}
    worst_lstm: dict[str, float] = {}
    for s in range(base_seed, base_seed + seeds):
        for name, err in cnn_gradcheck(s).items():
            worst_cnn[name] = max(worst_cnn.get(name, 0.0), err)
        for name, err in bilstm_gradcheck(s).items():
            worst_lstm[name] = max(worst_lstm.get(name, 0.0), err)
    for name in sorted(worst_cnn):
        rows.append((f"cnn/{name}", worst_cnn[name]))
    for name in sorted(worst_lstm):
        rows.append((f"bilstm/{name}", worst_lstm[name]))
    rows.append(("lstm_cell", max(lstm_cell_gradcheck(s)
                                  for s in range(base_seed, base_seed + seeds))))
    rows.append(("rnn_cell", max(rnn_cell_gradcheck(s)
                                 for s in range(base_seed, base_seed + seeds))))
    rows.append(("softmax_xent", max(softmax_gradcheck(s)
                                     for s in range(base_seed, base_seed + seeds))))
    return rows
