"""Soft-voting ensembles, prevalence quantification by probability
averaging, and the pairwise Pearson diagnostic between model outputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DataError


def soft_vote(member_probs: Sequence[np.ndarray]) -> np.ndarray:
    """Entrywise mean of the members' probability vectors for one example."""
    if len(member_probs) == 0:
        raise DataError("soft_vote needs at least one member")
    K = len(member_probs[0])
    for p in member_probs:
        if len(p) != K:
            raise DataError(
                f"mixed class counts in soft_vote: {len(p)} vs {K}")
    return np.mean(np.stack([np.asarray(p, dtype=np.float64)
                             for p in member_probs]), axis=0)


def quantify(all_probs: Sequence[np.ndarray]) -> np.ndarray:
    """Corpus-level class prevalence: the columnwise mean of per-example
    probability vectors."""
    if len(all_probs) == 0:
        raise DataError("quantify needs at least one prediction")
    mat = np.stack([np.asarray(p, dtype=np.float64) for p in all_probs])
    return mat.mean(axis=0)


def pearson_matrix(model_outputs: Sequence[np.ndarray]) -> np.ndarray:
    """Pearson correlation between each pair of models' flattened N*K
    probability arrays."""
    if len(model_outputs) == 0:
        raise DataError("pearson_matrix needs at least one model")
    flats = []
    shape = np.asarray(model_outputs[0]).shape
    for i, out in enumerate(model_outputs):
        arr = np.asarray(out, dtype=np.float64)
        if arr.shape != shape:
            raise DataError(
                f"model {i} prediction shape {arr.shape} != {shape}")
        flat = arr.reshape(-1)
        if np.ptp(flat) == 0.0:
            raise DataError(f"model {i} has constant outputs")
        flats.append(flat)
    return np.corrcoef(np.stack(flats))
