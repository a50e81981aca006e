"""Distant and supervised training phases.

Both phases share one mini-batch Adam loop. The embedding table starts
frozen and is released after a configured number of epochs; on release the
supervised phase also drops the learning rate tenfold (held by every
AdamState, so the schedule is observable from optimizer state). History
records one (loss, accuracy) pair per epoch, measured by a clean
dropout-free pass at epoch end, which keeps `predict` consistent with the
recorded final accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus import Example, PAD, Subtask, Vocabulary, class_weights
from .errors import DataError
from .models import (BiLstmParams, CnnParams, EmbeddingMatrix, bilstm_backward,
                     bilstm_forward, cnn_backward, cnn_forward, embed,
                     embed_backward)
from .tensor import AdamState, adam_step, softmax_xent
from .text import TokenizedTweet

LogFn = Callable[[str], None]


@dataclass
class TrainSchedule:
    phase: str  # "distant" | "supervised"
    frozen_epochs: int
    unfrozen_epochs: int
    lr_initial: float = 0.001
    lr_unfrozen_scale: float = 1.0
    batch_size: int = 32

    def __post_init__(self):
        if self.frozen_epochs + self.unfrozen_epochs < 1:
            raise ValueError("schedule must run at least one epoch")
        if self.lr_initial <= 0 or self.lr_unfrozen_scale <= 0:
            raise ValueError("learning rates must be positive")

    @property
    def total_epochs(self) -> int:
        return self.frozen_epochs + self.unfrozen_epochs

    @classmethod
    def distant_default(cls, batch_size: int = 32) -> "TrainSchedule":
        return cls(phase="distant", frozen_epochs=1, unfrozen_epochs=6,
                   lr_initial=0.001, lr_unfrozen_scale=1.0,
                   batch_size=batch_size)

    @classmethod
    def supervised_default(cls, batch_size: int = 32) -> "TrainSchedule":
        return cls(phase="supervised", frozen_epochs=5, unfrozen_epochs=5,
                   lr_initial=0.001, lr_unfrozen_scale=0.1,
                   batch_size=batch_size)


@dataclass
class CnnArch:
    filter_sizes: tuple[int, ...] = (3, 4, 5)
    filters_per_size: int = 200
    hidden: int = 30
    s_prime: int = 80
    dropout_p: float = 0.5


@dataclass
class LstmArch:
    m: int = 200
    hidden: int = 30
    s_prime: int = 80
    dropout_p: float = 0.5


@dataclass
class TrainedModel:
    kind: str  # "cnn" | "bilstm"
    params: CnnParams | BiLstmParams
    emb: EmbeddingMatrix
    vocab: Vocabulary
    subtask: Subtask
    history: list[tuple[float, float]] = field(default_factory=list)
    optimizer_lr: float = 0.0  # lr in effect when training finished


def _forward(kind: str, params, X, true_len: int, rng, train: bool):
    if kind == "cnn":
        return cnn_forward(X, params, rng, train)
    return bilstm_forward(X, true_len, params, rng, train)


def _backward(kind: str, cache, params, dlogits):
    if kind == "cnn":
        return cnn_backward(cache, params, dlogits)
    return bilstm_backward(cache, params, dlogits)


def _true_len(tweet: TokenizedTweet, s_prime: int, kind: str,
              ex_id: str) -> int:
    n = min(len(tweet.tokens), s_prime)
    if n == 0 and kind == "bilstm":
        raise DataError(f"example {ex_id}: empty tweet cannot feed the bilstm")
    return n

@dataclass
class _Item:
    tweet: TokenizedTweet
    label: int
    weight: float
    ex_id: str


def _epoch_eval(kind, params, emb, vocab, items, use_topic, s_prime,
                rng_unused) -> tuple[float, float]:
    """Dropout-free pass over the full set: (mean weighted loss, accuracy)."""
    rng = np.random.default_rng(0)  # never consumed with train=False
    total_loss = 0.0
    correct = 0
    for it in items:
        X, _ = embed(it.tweet, emb, vocab, use_topic, s_prime)
        tl = _true_len(it.tweet, s_prime, kind, it.ex_id)
        probs, cache = _forward(kind, params, X, tl, rng, train=False)
        loss, _, _ = softmax_xent(cache.logits, it.label, it.weight)
        total_loss += loss
        if int(np.argmax(probs)) == it.label:
            correct += 1
    return total_loss / len(items), correct / len(items)


def _train_loop(kind: str, params, emb: EmbeddingMatrix, vocab: Vocabulary,
                items: list[_Item], sched: TrainSchedule, seed: int,
                use_topic: bool, log: LogFn | None,
                probe=None) -> list[tuple[float, float]]:
    rng = np.random.default_rng(seed)
    s_prime = params.s_prime
    model_params = params.param_dict()
    emb_params = emb.param_dict()

    trainable: dict[str, np.ndarray] = dict(model_params)
    if use_topic:
        trainable["emb/topic"] = emb_params["emb/topic"]
    states = {name: AdamState.for_param(p, lr=sched.lr_initial)
              for name, p in trainable.items()}

    emb.frozen = sched.frozen_epochs > 0
    history: list[tuple[float, float]] = []
    for epoch in range(1, sched.total_epochs + 1):
        if epoch == sched.frozen_epochs + 1:
            emb.frozen = False
            new_lr = sched.lr_initial * sched.lr_unfrozen_scale
            for st in states.values():
                st.lr = new_lr
            trainable["emb/E"] = emb_params["emb/E"]
            states["emb/E"] = AdamState.for_param(emb_params["emb/E"], lr=new_lr)

        order = rng.permutation(len(items))
        for lo in range(0, len(order), sched.batch_size):
            batch = order[lo:lo + sched.batch_size]
            acc = {name: np.zeros_like(p) for name, p in trainable.items()}
            for j in batch:
                it = items[j]
                X, ecache = embed(it.tweet, emb, vocab, use_topic, s_prime)
                tl = _true_len(it.tweet, s_prime, kind, it.ex_id)
                probs, cache = _forward(kind, params, X, tl, rng, train=True)
                _, _, dlogits = softmax_xent(cache.logits, it.label, it.weight)
                dlogits /= len(batch)
                grads, dX = _backward(kind, cache, params, dlogits)
                for name, g in grads.items():
                    acc[name] += g
                for name, g in embed_backward(ecache, dX, emb).items():
                    if name in acc:
                        acc[name] += g
            for name, st in states.items():
                adam_step(trainable[name], acc[name], st)
            emb.E[PAD] = 0.0

        loss, accuracy = _epoch_eval(kind, params, emb, vocab, items,
                                     use_topic, s_prime, rng)
        history.append((loss, accuracy))
        if log is not None:
            log(f"{epoch}\t{sched.phase}\t{loss:.6f}\t{accuracy:.4f}")
        if probe is not None:
            probe(epoch, states, emb)
    return history


def distant_train(emb: EmbeddingMatrix, positives: Sequence[TokenizedTweet],
                  negatives: Sequence[TokenizedTweet], vocab: Vocabulary,
                  sched: TrainSchedule | None = None, seed: int = 0,
                  arch: CnnArch | None = None,
                  log: LogFn | None = None, probe=None) -> EmbeddingMatrix:
    """Fine-tune embeddings by training a throwaway binary CNN on the noisy
    emoticon-labeled corpus; returns the tuned table, input left intact."""
    if not positives or not negatives:
        raise DataError("distant training needs both positives and negatives")
    sched = sched or TrainSchedule.distant_default()
    if sched.phase != "distant":
        raise ValueError(f"expected a distant schedule, got {sched.phase!r}")
    arch = arch or CnnArch()
    tuned = emb.copy()
    rng = np.random.default_rng(seed)
    params = CnnParams.init(rng, d_in=tuned.dim, num_classes=2,
                            filter_sizes=arch.filter_sizes,
                            filters_per_size=arch.filters_per_size,
                            hidden=arch.hidden, s_prime=arch.s_prime,
                            dropout_p=arch.dropout_p)
    items = [_Item(t, 1, 1.0, f"pos{i}") for i, t in enumerate(positives)]
    items += [_Item(t, 0, 1.0, f"neg{i}") for i, t in enumerate(negatives)]
    _train_loop("cnn", params, tuned, vocab, items, sched, seed,
                use_topic=False, log=log, probe=probe)
    tuned.frozen = False
    return tuned


def supervised_train(kind: str, subtask: Subtask, data: Sequence[Example],
                     emb: EmbeddingMatrix, vocab: Vocabulary,
                     sched: TrainSchedule | None = None, seed: int = 0,
                     arch: CnnArch | LstmArch | None = None,
                     log: LogFn | None = None, probe=None) -> TrainedModel:
    """Train one classifier on labeled data with inverse-frequency class
    weights; embeddings frozen for the first scheduled epochs, then
    released at a tenth of the learning rate."""
    if kind not in ("cnn", "bilstm"):
        raise ValueError(f"unknown model kind {kind!r}")
    sched = sched or TrainSchedule.supervised_default()
    if sched.phase != "supervised":
        raise ValueError(f"expected a supervised schedule, got {sched.phase!r}")
    weights = class_weights(data, subtask.num_classes)
    model_emb = emb.copy()
    rng = np.random.default_rng(seed)
    use_topic = subtask.has_topic
    d_in = model_emb.dim + (model_emb.topic_vecs.shape[1] if use_topic else 0)
    if kind == "cnn":
        arch = arch or CnnArch()
        params = CnnParams.init(rng, d_in=d_in, num_classes=subtask.num_classes,
                                filter_sizes=arch.filter_sizes,
                                filters_per_size=arch.filters_per_size,
                                hidden=arch.hidden, s_prime=arch.s_prime,
                                dropout_p=arch.dropout_p)
    else:
        arch = arch or LstmArch()
        params = BiLstmParams.init(rng, d_in=d_in,
                                   num_classes=subtask.num_classes, m=arch.m,
                                   hidden=arch.hidden, s_prime=arch.s_prime,
                                   dropout_p=arch.dropout_p)
    items = [_Item(ex.tweet, ex.label, float(weights[ex.label]), ex.id)
             for ex in data]
    history = _train_loop(kind, params, model_emb, vocab, items, sched, seed,
                          use_topic=use_topic, log=log, probe=probe)
    final_lr = sched.lr_initial * (sched.lr_unfrozen_scale
                                   if sched.unfrozen_epochs > 0 else 1.0)
    return TrainedModel(kind=kind, params=params, emb=model_emb, vocab=vocab,
                        subtask=subtask, history=history,
                        optimizer_lr=final_lr)


def predict(model: TrainedModel, examples: Sequence[Example]) -> list[np.ndarray]:
    """Dropout-free forward pass; one probability vector per example."""
    rng = np.random.default_rng(0)  # never consumed
    use_topic = model.subtask.has_topic
    s_prime = model.params.s_prime
    out = []
    for ex in examples:
        X, _ = embed(ex.tweet, model.emb, model.vocab, use_topic, s_prime)
        tl = _true_len(ex.tweet, s_prime, model.kind, ex.id)
        probs, _ = _forward(model.kind, model.params, X, tl, rng, train=False)
        out.append(probs)
    return out
