"""Evaluation metrics for the five subtasks.

Classification subtasks use macroaveraged recall (plus accuracy and the
positive/negative F1 average for the 3-class task), the ordinal subtask
uses macroaveraged MAE, and the quantification subtasks use smoothed
Kullback-Leibler divergence and earth mover's distance over the ordered
classes. `evaluate` dispatches per subtask over gold/prediction files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Subtask
from .errors import DataError


@dataclass
class EvalReport:
    subtask: str
    metric: str
    value: float
    per_class: dict[int, float] | None = None
    extras: dict[str, float] = field(default_factory=dict)


def _as_labels(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    return arr


def macro_recall(gold, pred, num_classes: int) -> float:
    """Mean over classes of (correct in class) / (gold count of class)."""
    g = _as_labels(gold)
    p = _as_labels(pred)
    if len(g) != len(p):
        raise ValueError(f"length mismatch: {len(g)} gold vs {len(p)} pred")
    recalls = []
    for c in range(num_classes):
        in_c = g == c
        if not in_c.any():
            raise DataError(f"class {c} absent from gold labels")
        recalls.append(float((p[in_c] == c).mean()))
    return float(np.mean(recalls))


def _f1_for_class(g: np.ndarray, p: np.ndarray, c: int) -> float:
    tp = int(((g == c) & (p == c)).sum())
    fp = int(((g != c) & (p == c)).sum())
    fn = int(((g == c) & (p != c)).sum())
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    if prec + rec == 0.0:
        return 0.0
    return 2.0 * prec * rec / (prec + rec)


def f1_pn(gold, pred) -> float:
    """Average F1 of the positive (2) and negative (0) classes on 3-class
    labels; neutral (1) is ignored except as a confusion source."""
    g = _as_labels(gold)
    p = _as_labels(pred)
    if len(g) != len(p):
        raise ValueError(f"length mismatch: {len(g)} gold vs {len(p)} pred")
    return 0.5 * (_f1_for_class(g, p, 2) + _f1_for_class(g, p, 0))


def macro_mae(gold, pred, num_classes: int | None = None) -> float:
    """Mean over gold classes of the mean absolute ordinal error.

    With num_classes given, every class must appear in gold; without it
    the average runs over the classes actually present.
    """
    g = _as_labels(gold)
    p = _as_labels(pred)
    if len(g) != len(p):
        raise ValueError(f"length mismatch: {len(g)} gold vs {len(p)} pred")
    classes = (range(num_classes) if num_classes is not None
               else sorted(set(g.tolist())))
    maes = []
    for c in classes:
        in_c = g == c
        if not in_c.any():
            raise DataError(f"class {c} absent from gold labels")
        maes.append(float(np.abs(p[in_c] - c).mean()))
    return float(np.mean(maes))


def kld(gold_dist, pred_dist, n_test: int) -> float:
    """KL divergence with both distributions smoothed by
    eps = 1/(2*n_test): p' = (p + eps) / (1 + K*eps)."""
    if n_test <= 0:
        raise ValueError(f"n_test must be positive, got {n_test}")
    g = np.asarray(gold_dist, dtype=np.float64)
    p = np.asarray(pred_dist, dtype=np.float64)
    if g.shape != p.shape:
        raise ValueError(f"distribution shapes differ: {g.shape} vs {p.shape}")
    K = len(g)
    eps = 1.0 / (2.0 * n_test)
    gs = (g + eps) / (1.0 + K * eps)
    ps = (p + eps) / (1.0 + K * eps)
    return float(np.sum(gs * np.log(gs / ps)))


def emd(gold_dist, pred_dist) -> float:
    """Earth mover's distance between distributions over ordered classes
    with unit spacing: the sum of absolute cumulative differences."""
    g = np.asarray(gold_dist, dtype=np.float64)
    p = np.asarray(pred_dist, dtype=np.float64)
    if g.shape != p.shape:
        raise ValueError(f"distribution shapes differ: {g.shape} vs {p.shape}")
    diff = np.cumsum(g - p)
    return float(np.abs(diff[:-1]).sum())


# ---------------------------------------------------------------------------
# file-level evaluation


def read_label_file(path: str | Path) -> dict[str, int]:
    """`id<TAB>label-index` rows."""
    out: dict[str, int] = {}
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"line {lineno}: expected 2 columns")
        try:
            out[parts[0]] = int(parts[1])
        except ValueError:
            raise DataError(f"line {lineno}: bad label {parts[1]!r}") from None
    if not out:
        raise DataError(f"no rows in {path}")
    return out


def read_pred_labels(path: str | Path) -> dict[str, int]:
    """Prediction rows: either `id<TAB>label` or `id<TAB>p_0<TAB>...`, the
    latter collapsed to the argmax class."""
    out: dict[str, int] = {}
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise DataError(f"line {lineno}: expected at least 2 columns")
        try:
            if len(parts) == 2:
                out[parts[0]] = int(parts[1])
            else:
                probs = [float(v) for v in parts[1:]]
                out[parts[0]] = int(np.argmax(probs))
        except ValueError:
            raise DataError(f"line {lineno}: bad prediction row") from None
    if not out:
        raise DataError(f"no rows in {path}")
    return out


def read_dist_file(path: str | Path) -> dict[str, np.ndarray]:
    """`topic<TAB>p_0<TAB>...<TAB>p_{K-1}` rows."""
    out: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise DataError(f"line {lineno}: expected topic plus >=2 probs")
        try:
            out[parts[0]] = np.asarray([float(v) for v in parts[1:]],
                                       dtype=np.float64)
        except ValueError:
            raise DataError(f"line {lineno}: bad probability") from None
    if not out:
        raise DataError(f"no rows in {path}")
    return out


def _aligned(gold: dict, pred: dict, what: str):
    missing = sorted(set(gold) - set(pred))
    extra = sorted(set(pred) - set(gold))
    if missing or extra:
        raise DataError(
            f"{what} mismatch: missing from pred {missing[:5]}, "
            f"unexpected {extra[:5]}")
    keys = sorted(gold)
    return keys


def evaluate(subtask: Subtask, gold_path: str | Path, pred_path: str | Path,
             n_test: int | None = None) -> EvalReport:
    """Score a prediction file against gold for one subtask.

    Subtasks A/B/C compare per-tweet labels; D/E compare per-topic
    distributions (averaged over topics). D needs n_test, the number of
    test tweets behind each predicted distribution, for smoothing.
    """
    sid = subtask.id
    if sid in ("A", "B", "C"):
        gold = read_label_file(gold_path)
        pred = read_pred_labels(pred_path)
        keys = _aligned(gold, pred, "ids")
        g = [gold[k] for k in keys]
        p = [pred[k] for k in keys]
        for name, labels in (("gold", g), ("pred", p)):
            bad = [x for x in labels if not 0 <= x < subtask.num_classes]
            if bad:
                raise DataError(f"{name} labels out of range: {bad[:5]}")
        if sid == "A":
            report = EvalReport(sid, "macro_recall",
                                macro_recall(g, p, subtask.num_classes))
            report.extras["accuracy"] = float(
                (np.asarray(g) == np.asarray(p)).mean())
            report.extras["f1_pn"] = f1_pn(g, p)
            return report
        if sid == "B":
            return EvalReport(sid, "macro_recall",
                              macro_recall(g, p, subtask.num_classes))
        return EvalReport(sid, "macro_mae",
                          macro_mae(g, p, subtask.num_classes))
    gold = read_dist_file(gold_path)
    pred = read_dist_file(pred_path)
    keys = _aligned(gold, pred, "topics")
    for k in keys:
        if len(gold[k]) != subtask.num_classes or len(pred[k]) != subtask.num_classes:
            raise DataError(f"topic {k}: expected {subtask.num_classes} probs")
    if sid == "D":
        if n_test is None:
            raise DataError("subtask D needs n_test for KLD smoothing")
        vals = [kld(gold[k], pred[k], n_test) for k in keys]
        return EvalReport(sid, "kld", float(np.mean(vals)))
    if sid == "E":
        vals = [emd(gold[k], pred[k]) for k in keys]
        return EvalReport(sid, "emd", float(np.mean(vals)))
    raise DataError(f"unknown subtask {sid!r}")
