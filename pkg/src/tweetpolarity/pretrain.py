"""Unsupervised word-embedding pretraining: skip-gram with negative
sampling over a tokenized tweet corpus.

Training is single-threaded and fully deterministic: all sampling
(subsampling, window widths, negatives) comes from one 64-bit LCG driven
by the seed, and the learning rate decays linearly with the number of
scanned tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .corpus import PAD, UNK, Vocabulary
from .errors import DataError
from .models import EmbeddingMatrix, TOPIC_DIM


@dataclass
class SkipGramConfig:
    dim: int = 200
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    subsample_t: float = 1e-3
    table_size: int = 1_000_000
    seed: int = 1

    def __post_init__(self):
        if self.window < 1 or self.negatives < 1:
            raise ValueError("window and negatives must be >= 1")


def keep_probabilities(counts: np.ndarray, subsample_t: float) -> np.ndarray:
    """Per-token keep probability min(1, sqrt(t/f)); tokens rarer than the
    threshold are always kept."""
    total = counts.sum()
    keep = np.ones(len(counts), dtype=np.float64)
    if total == 0 or subsample_t <= 0:
        return keep
    freq = counts / total
    nz = freq > 0
    keep[nz] = np.minimum(1.0, np.sqrt(subsample_t / freq[nz]))
    return keep


def build_negative_table(counts: np.ndarray, table_size: int) -> np.ndarray:
    """Sampling table proportional to count^0.75, excluding the pad row."""
    pow_counts = counts.astype(np.float64) ** 0.75
    pow_counts[PAD] = 0.0
    ids = np.nonzero(pow_counts > 0)[0]
    if len(ids) == 0:
        raise DataError("cannot build a negative-sampling table: no tokens")
    cum = np.cumsum(pow_counts[ids])
    cum /= cum[-1]
    positions = (np.arange(table_size) + 0.5) / table_size
    slots = np.searchsorted(cum, positions)
    return ids[np.clip(slots, 0, len(ids) - 1)].astype(np.int32)


def _flatten(sentences: Iterable[Sequence[str]],
             vocab: Vocabulary) -> tuple[np.ndarray, np.ndarray]:
    toks: list[np.ndarray] = []
    offsets = [0]
    n = 0
    for sent in sentences:
        enc = vocab.encode(sent)
        toks.append(enc)
        n += len(enc)
        offsets.append(n)
    if n == 0:
        raise DataError("empty pretraining corpus")
    return (np.concatenate(toks).astype(np.int32),
            np.asarray(offsets, dtype=np.int64))


def train_skipgram(sentences: Iterable[Sequence[str]], vocab: Vocabulary,
                   cfg: SkipGramConfig,
                   log=None) -> EmbeddingMatrix:
    """Train input vectors on (center -> context) prediction with negative
    sampling; returns the input-vector table as an EmbeddingMatrix."""
    tokens, offsets = _flatten(sentences, vocab)
    V = len(vocab)
    rng = np.random.default_rng(cfg.seed)
    Ein = ((rng.random((V, cfg.dim)) - 0.5) / cfg.dim).astype(np.float32)
    Ein[PAD] = 0.0
    Eout = np.zeros((V, cfg.dim), dtype=np.float32)
    counts = np.bincount(tokens, minlength=V).astype(np.int64)
    keep = keep_probabilities(counts, cfg.subsample_t)
    table = build_negative_table(counts, cfg.table_size)

    state = np.uint64(cfg.seed if cfg.seed > 0 else 1)
    scanned = 0
    total_scan = cfg.epochs * len(tokens) + 1
    for epoch in range(cfg.epochs):
        state, scanned, loss_sum, pairs = kernels.skipgram_epoch(
            tokens, offsets, Ein, Eout, table, keep,
            cfg.window, cfg.negatives, cfg.initial_lr, cfg.min_lr,
            scanned, total_scan, state)
        state = np.uint64(state)
        scanned = int(scanned)
        if log is not None:
            mean_loss = loss_sum / max(int(pairs), 1)
            log(f"{epoch + 1}\tpretrain\t{mean_loss:.6f}\t-")

    topic = rng.uniform(-0.25, 0.25, size=(2, TOPIC_DIM)).astype(np.float32)
    return EmbeddingMatrix(E=Ein, topic_vecs=topic)


def nearest_neighbors(emb: EmbeddingMatrix, vocab: Vocabulary, token: str,
                      k: int = 10) -> list[tuple[str, float]]:
    """Top-k cosine neighbors of a token, excluding itself and specials."""
    if token not in vocab.stoi:
        raise DataError(f"unknown token {token!r}")
    q = vocab.stoi[token]
    E = emb.E.astype(np.float64)
    norms = np.linalg.norm(E, axis=1)
    qv = E[q]
    qn = norms[q]
    if qn == 0:
        return []
    cos = (E @ qv) / (np.maximum(norms, 1e-12) * qn)
    order = np.argsort(-cos, kind="stable")
    out = []
    for i in order:
        if i in (q, PAD, UNK):
            continue
        out.append((vocab.itos[i], float(cos[i])))
        if len(out) == k:
            break
    return out
