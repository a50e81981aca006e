"""The two classifiers: a multi-width convolutional net with max-over-time
pooling and a bidirectional LSTM, plus the shared embedding lookup.

Both models map a zero-padded token matrix to class probabilities through
a small relu hidden layer and a softmax. Forward passes return a cache;
backward passes consume it and produce a flat name->gradient dict whose
keys match ``*_param_dict``. Gate rows in LSTM weight matrices are stacked
[input; forget; output; candidate].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .corpus import PAD, Vocabulary
from .tensor import dropout, relu, sigmoid
from .text import TokenizedTweet

TOPIC_DIM = 5
DEFAULT_SEQ_LEN = 80


# ---------------------------------------------------------------------------
# embeddings


@dataclass
class EmbeddingMatrix:
    """Word-vector table plus the two-row topic-flag table.

    Row 0 of E is the padding vector: all zeros, never updated. ``frozen``
    gates whether E receives gradient during training; the topic vectors
    are model parameters and always learn.
    """

    E: np.ndarray           # (V, d) float32
    topic_vecs: np.ndarray  # (2, TOPIC_DIM) float32
    frozen: bool = False

    @property
    def dim(self) -> int:
        return self.E.shape[1]

    @classmethod
    def random(cls, vocab_size: int, dim: int, rng: np.random.Generator,
               scale: float = 0.05) -> "EmbeddingMatrix":
        E = rng.uniform(-scale, scale, size=(vocab_size, dim)).astype(np.float32)
        E[PAD] = 0.0
        topic = rng.uniform(-0.25, 0.25, size=(2, TOPIC_DIM)).astype(np.float32)
        return cls(E=E, topic_vecs=topic)

    def copy(self) -> "EmbeddingMatrix":
        return EmbeddingMatrix(E=self.E.copy(), topic_vecs=self.topic_vecs.copy(),
                               frozen=self.frozen)

    def param_dict(self) -> dict[str, np.ndarray]:
        return {"emb/E": self.E, "emb/topic": self.topic_vecs}


@dataclass
class EmbedCache:
    idx: np.ndarray            # (true_len,) int32 token indices
    flags: np.ndarray | None   # (s_prime,) int64, None when topic unused
    word_dim: int
    true_len: int


def embed(tweet: TokenizedTweet, emb: EmbeddingMatrix, vocab: Vocabulary,
          use_topic: bool,
          s_prime: int = DEFAULT_SEQ_LEN) -> tuple[np.ndarray, EmbedCache]:
    """Build the (s_prime, d_in) input matrix for one tweet.

    Tweets longer than s_prime are truncated; rows past the tweet are zero
    in the word channel and carry the not-in-topic vector when the topic
    channel is on. Unknown tokens map to the <unk> row.
    """
    idx = vocab.encode(tweet.tokens[:s_prime])
    L = len(idx)
    d = emb.dim
    d_in = d + emb.topic_vecs.shape[1] if use_topic else d
    X = np.zeros((s_prime, d_in), dtype=emb.E.dtype)
    if L:
        X[:L, :d] = emb.E[idx]
    flags = None
    if use_topic:
        flags = np.zeros(s_prime, dtype=np.int64)
        if L:
            flags[:L] = np.asarray(tweet.topic_flags[:s_prime], dtype=np.int64)
        X[:, d:] = emb.topic_vecs[flags]
    return X, EmbedCache(idx=idx, flags=flags, word_dim=d, true_len=L)


def embed_backward(cache: EmbedCache, dX: np.ndarray,
                   emb: EmbeddingMatrix) -> dict[str, np.ndarray]:
    """Scatter dX back onto the embedding tables.

    The padding row stays zero-gradient; a frozen table gets an all-zero
    gradient so the optimizer leaves it untouched.
    """
    d = cache.word_dim
    dE = np.zeros_like(emb.E)
    if not emb.frozen and cache.true_len:
        np.add.at(dE, cache.idx, dX[:cache.true_len, :d])
        dE[PAD] = 0.0
    dtopic = np.zeros_like(emb.topic_vecs)
    if cache.flags is not None:
        np.add.at(dtopic, cache.flags, dX[:, d:])
    return {"emb/E": dE, "emb/topic": dtopic}


# ---------------------------------------------------------------------------
# CNN


@dataclass
class CnnParams:
    """Per-height filter stacks plus the dense head."""

    filters: dict[int, np.ndarray]  # h -> (F, h, d_in)
    biases: dict[int, np.ndarray]   # h -> (F,)
    W_hidden: np.ndarray            # (hidden, total_filters)
    b_hidden: np.ndarray
    W_out: np.ndarray               # (K, hidden)
    b_out: np.ndarray
    s_prime: int = DEFAULT_SEQ_LEN
    dropout_p: float = 0.5

    @property
    def filter_sizes(self) -> list[int]:
        return sorted(self.filters)

    @property
    def num_classes(self) -> int:
        return self.W_out.shape[0]

    @classmethod
    def init(cls, rng: np.random.Generator, d_in: int, num_classes: int,
             filter_sizes=(3, 4, 5), filters_per_size: int = 200,
             hidden: int = 30, s_prime: int = DEFAULT_SEQ_LEN,
             dropout_p: float = 0.5, scale: float = 0.05) -> "CnnParams":
        filters = {}
        biases = {}
        for h in filter_sizes:
            filters[h] = rng.uniform(
                -scale, scale, size=(filters_per_size, h, d_in)).astype(np.float32)
            biases[h] = np.zeros(filters_per_size, dtype=np.float32)
        m_total = filters_per_size * len(filter_sizes)
        return cls(
            filters=filters, biases=biases,
            W_hidden=rng.uniform(-scale, scale,
                                 size=(hidden, m_total)).astype(np.float32),
            b_hidden=np.zeros(hidden, dtype=np.float32),
            W_out=rng.uniform(-scale, scale,
                              size=(num_classes, hidden)).astype(np.float32),
            b_out=np.zeros(num_classes, dtype=np.float32),
            s_prime=s_prime, dropout_p=dropout_p)

    def param_dict(self) -> dict[str, np.ndarray]:
        out = {}
        for h in self.filter_sizes:
            out[f"conv{h}/w"] = self.filters[h]
            out[f"conv{h}/b"] = self.biases[h]
        out.update({"hidden/W": self.W_hidden, "hidden/b": self.b_hidden,
                    "out/W": self.W_out, "out/b": self.b_out})
        return out


@dataclass
class CnnCache:
    X: np.ndarray
    pooled: dict[int, np.ndarray]
    argmax: dict[int, np.ndarray]
    drop1: np.ndarray
    mask1: np.ndarray
    hpre: np.ndarray
    drop2: np.ndarray
    mask2: np.ndarray
    logits: np.ndarray


def _softmax(logits: np.ndarray) -> np.ndarray:
    ex = np.exp(logits - logits.max())
    return ex / ex.sum()


def cnn_forward(X: np.ndarray, p: CnnParams, rng: np.random.Generator,
                train: bool) -> tuple[np.ndarray, CnnCache]:
    """Convolutions of every size -> max-over-time -> dropout -> relu
    hidden layer -> dropout -> softmax."""
    if X.shape[0] != p.s_prime:
        raise ValueError(f"expected {p.s_prime} rows, got {X.shape[0]}")
    pooled = {}
    argmax = {}
    parts = []
    for h in p.filter_sizes:
        ph, ah = kernels.conv_pool(X, p.filters[h], p.biases[h])
        pooled[h] = ph
        argmax[h] = ah
        parts.append(ph)
    pool_vec = np.concatenate(parts)
    drop1, mask1 = dropout(pool_vec, p.dropout_p, rng, train)
    hpre = p.W_hidden @ drop1 + p.b_hidden
    hact = relu(hpre)
    drop2, mask2 = dropout(hact, p.dropout_p, rng, train)
    logits = p.W_out @ drop2 + p.b_out
    probs = _softmax(logits)
    return probs, CnnCache(X=X, pooled=pooled, argmax=argmax, drop1=drop1,
                           mask1=mask1, hpre=hpre, drop2=drop2, mask2=mask2,
                           logits=logits)


def cnn_backward(cache: CnnCache, p: CnnParams,
                 dlogits: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Exact gradients for every CnnParams entry; also returns dX so the
    caller can push gradient into the embedding tables."""
    grads: dict[str, np.ndarray] = {}
    grads["out/W"] = np.outer(dlogits, cache.drop2)
    grads["out/b"] = dlogits.copy()
    dd2 = p.W_out.T @ dlogits
    dhact = dd2 * cache.mask2
    dhpre = dhact * (cache.hpre > 0)
    grads["hidden/W"] = np.outer(dhpre, cache.drop1)
    grads["hidden/b"] = dhpre
    dpool = (p.W_hidden.T @ dhpre) * cache.mask1
    dX = np.zeros_like(cache.X)
    ofs = 0
    for h in p.filter_sizes:
        F = p.filters[h].shape[0]
        dW, db, dXh = kernels.conv_pool_backward(
            cache.X, p.filters[h], cache.argmax[h], cache.pooled[h],
            np.ascontiguousarray(dpool[ofs:ofs + F]))
        grads[f"conv{h}/w"] = dW
        grads[f"conv{h}/b"] = db
        dX += dXh
        ofs += F
    return grads, dX


# ---------------------------------------------------------------------------
# recurrent cells


@dataclass
class LstmCellParams:
    """One direction's weights; gate rows stacked [i; f; o; g]."""

    Wx: np.ndarray  # (4m, d_in)
    Wh: np.ndarray  # (4m, m)
    b: np.ndarray   # (4m,)

    @property
    def m(self) -> int:
        return self.Wh.shape[1]

    @classmethod
    def init(cls, rng: np.random.Generator, d_in: int, m: int,
             scale: float = 0.05, forget_bias: float = 1.0) -> "LstmCellParams":
        Wx = rng.uniform(-scale, scale, size=(4 * m, d_in)).astype(np.float32)
        Wh = rng.uniform(-scale, scale, size=(4 * m, m)).astype(np.float32)
        b = np.zeros(4 * m, dtype=np.float32)
        b[m:2 * m] = forget_bias
        return cls(Wx=Wx, Wh=Wh, b=b)


def lstm_cell(x_t: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray,
              cell: LstmCellParams):
    """Single LSTM step; returns (h_t, c_t, cache)."""
    m = cell.m
    if x_t.shape[0] != cell.Wx.shape[1]:
        raise ValueError(
            f"lstm_cell input dim {x_t.shape[0]} != {cell.Wx.shape[1]}")
    a = cell.Wx @ x_t + cell.Wh @ h_prev + cell.b
    i = sigmoid(a[:m])
    f = sigmoid(a[m:2 * m])
    o = sigmoid(a[2 * m:3 * m])
    g = np.tanh(a[3 * m:])
    c_t = f * c_prev + i * g
    h_t = o * np.tanh(c_t)
    cache = (x_t, h_prev, c_prev, i, f, o, g, c_t)
    return h_t, c_t, cache


def lstm_cell_backward(cache, cell: LstmCellParams, dh: np.ndarray,
                       dc: np.ndarray):
    """Backward of one step. Returns (dx, dh_prev, dc_prev, dWx, dWh, db)."""
    x_t, h_prev, c_prev, i, f, o, g, c_t = cache
    tc = np.tanh(c_t)
    do = dh * tc
    dct = dc + dh * o * (1.0 - tc * tc)
    di = dct * g
    dg = dct * i
    df = dct * c_prev
    dc_prev = dct * f
    dA = np.concatenate([di * i * (1.0 - i), df * f * (1.0 - f),
                         do * o * (1.0 - o), dg * (1.0 - g * g)])
    dWx = np.outer(dA, x_t)
    dWh = np.outer(dA, h_prev)
    db = dA.copy()
    dx = cell.Wx.T @ dA
    dh_prev = cell.Wh.T @ dA
    return dx, dh_prev, dc_prev, dWx, dWh, db


def rnn_cell(x_t: np.ndarray, h_prev: np.ndarray, W: np.ndarray,
             U: np.ndarray, b: np.ndarray):
    """Plain tanh recurrence; kept as a gradient-check baseline."""
    if W.shape[1] != x_t.shape[0] or U.shape[1] != h_prev.shape[0]:
        raise ValueError(
            f"rnn_cell shape mismatch: W {W.shape}, x {x_t.shape}, "
            f"U {U.shape}, h {h_prev.shape}")
    a = W @ x_t + U @ h_prev + b
    h_t = np.tanh(a)
    return h_t, (x_t, h_prev, h_t)


def rnn_cell_backward(cache, W: np.ndarray, U: np.ndarray, dh: np.ndarray):
    x_t, h_prev, h_t = cache
    da = dh * (1.0 - h_t * h_t)
    return (W.T @ da, U.T @ da, np.outer(da, x_t), np.outer(da, h_prev),
            da.copy())


# ---------------------------------------------------------------------------
# bidirectional LSTM classifier


@dataclass
class BiLstmParams:
    fwd: LstmCellParams
    bwd: LstmCellParams
    W_hidden: np.ndarray  # (hidden, 2m)
    b_hidden: np.ndarray
    W_out: np.ndarray     # (K, hidden)
    b_out: np.ndarray
    s_prime: int = DEFAULT_SEQ_LEN
    dropout_p: float = 0.5

    @property
    def m(self) -> int:
        return self.fwd.m

    @property
    def num_classes(self) -> int:
        return self.W_out.shape[0]

    @classmethod
    def init(cls, rng: np.random.Generator, d_in: int, num_classes: int,
             m: int = 200, hidden: int = 30, s_prime: int = DEFAULT_SEQ_LEN,
             dropout_p: float = 0.5, scale: float = 0.05) -> "BiLstmParams":
        return cls(
            fwd=LstmCellParams.init(rng, d_in, m, scale),
            bwd=LstmCellParams.init(rng, d_in, m, scale),
            W_hidden=rng.uniform(-scale, scale,
                                 size=(hidden, 2 * m)).astype(np.float32),
            b_hidden=np.zeros(hidden, dtype=np.float32),
            W_out=rng.uniform(-scale, scale,
                              size=(num_classes, hidden)).astype(np.float32),
            b_out=np.zeros(num_classes, dtype=np.float32),
            s_prime=s_prime, dropout_p=dropout_p)

    def param_dict(self) -> dict[str, np.ndarray]:
        return {"fwd/Wx": self.fwd.Wx, "fwd/Wh": self.fwd.Wh, "fwd/b": self.fwd.b,
                "bwd/Wx": self.bwd.Wx, "bwd/Wh": self.bwd.Wh, "bwd/b": self.bwd.b,
                "hidden/W": self.W_hidden, "hidden/b": self.b_hidden,
                "out/W": self.W_out, "out/b": self.b_out}


@dataclass
class BiLstmCache:
    X: np.ndarray
    mask_in: np.ndarray
    true_len: int
    Xf: np.ndarray
    Xb: np.ndarray
    Hf: np.ndarray
    Cf: np.ndarray
    Gf: np.ndarray
    Hb: np.ndarray
    Cb: np.ndarray
    Gb: np.ndarray
    drop1: np.ndarray
    mask1: np.ndarray
    hpre: np.ndarray
    drop2: np.ndarray
    mask2: np.ndarray
    logits: np.ndarray


def bilstm_forward(X: np.ndarray, true_len: int, p: BiLstmParams,
                   rng: np.random.Generator,
                   train: bool) -> tuple[np.ndarray, BiLstmCache]:
    """One cell reads tokens first-to-last, the other last-to-first; their
    final hidden states are concatenated. Padding rows are never read.
    Dropout applies to the inputs, to the concatenated state and after the
    hidden layer."""
    if not 1 <= true_len <= p.s_prime:
        raise ValueError(f"true_len must be in [1, {p.s_prime}], got {true_len}")
    Xd, mask_in = dropout(X, p.dropout_p, rng, train)
    Xf = np.ascontiguousarray(Xd[:true_len])
    Xb = np.ascontiguousarray(Xf[::-1])
    Hf, Cf, Gf = kernels.lstm_forward(Xf, p.fwd.Wx, p.fwd.Wh, p.fwd.b)
    Hb, Cb, Gb = kernels.lstm_forward(Xb, p.bwd.Wx, p.bwd.Wh, p.bwd.b)
    concat = np.concatenate([Hf[-1], Hb[-1]])
    drop1, mask1 = dropout(concat, p.dropout_p, rng, train)
    hpre = p.W_hidden @ drop1 + p.b_hidden
    hact = relu(hpre)
    drop2, mask2 = dropout(hact, p.dropout_p, rng, train)
    logits = p.W_out @ drop2 + p.b_out
    probs = _softmax(logits)
    return probs, BiLstmCache(X=X, mask_in=mask_in, true_len=true_len,
                              Xf=Xf, Xb=Xb, Hf=Hf, Cf=Cf, Gf=Gf,
                              Hb=Hb, Cb=Cb, Gb=Gb, drop1=drop1, mask1=mask1,
                              hpre=hpre, drop2=drop2, mask2=mask2,
                              logits=logits)


def bilstm_backward(cache: BiLstmCache, p: BiLstmParams,
                    dlogits: np.ndarray) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """BPTT through both directions; dX rows past true_len stay zero."""
    m = p.m
    grads: dict[str, np.ndarray] = {}
    grads["out/W"] = np.outer(dlogits, cache.drop2)
    grads["out/b"] = dlogits.copy()
    dd2 = p.W_out.T @ dlogits
    dhact = dd2 * cache.mask2
    dhpre = dhact * (cache.hpre > 0)
    grads["hidden/W"] = np.outer(dhpre, cache.drop1)
    grads["hidden/b"] = dhpre
    dconcat = (p.W_hidden.T @ dhpre) * cache.mask1
    dXf, dWxf, dWhf, dbf = kernels.lstm_backward(
        cache.Xf, p.fwd.Wx, p.fwd.Wh, cache.Hf, cache.Cf, cache.Gf,
        np.ascontiguousarray(dconcat[:m]))
    dXb, dWxb, dWhb, dbb = kernels.lstm_backward(
        cache.Xb, p.bwd.Wx, p.bwd.Wh, cache.Hb, cache.Cb, cache.Gb,
        np.ascontiguousarray(dconcat[m:]))
    grads["fwd/Wx"] = dWxf
    grads["fwd/Wh"] = dWhf
    grads["fwd/b"] = dbf
    grads["bwd/Wx"] = dWxb
    grads["bwd/Wh"] = dWhb
    grads["bwd/b"] = dbb
    dX = np.zeros_like(cache.X)
    dX[:cache.true_len] = (dXf + dXb[::-1]) * cache.mask_in[:cache.true_len]
    return grads, dX
