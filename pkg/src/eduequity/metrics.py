"""Consistency, equality and ranking accuracy."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .principles import N_PRINCIPLES, PrincipleContext, evaluate_all, gini


def as_weights(w) -> np.ndarray:
    """Validate a 7-entry weight vector with entries in [0, 1] and a positive sum."""
    arr = np.asarray(list(w), dtype=np.float64)
    if arr.shape != (N_PRINCIPLES,):
        raise ValueError(f"weight vector must have {N_PRINCIPLES} entries")
    if (arr < 0).any() or (arr > 1).any() or np.isnan(arr).any():
        raise ValueError("weights must lie in [0, 1]")
    if arr.sum() <= 0:
        raise ValueError("weights sum to zero")
    return arr


def consistency(p, q, w) -> float:
    """``1 - sum_m w_m |p_m - q_m| / sum_m w_m``.

    With unit weights this is one minus the mean absolute deviation between
    target and achieved principle vectors.
    """
    p = np.asarray(list(p), dtype=np.float64)
    q = np.asarray(list(q), dtype=np.float64)
    w = as_weights(w)
    if p.shape != (N_PRINCIPLES,) or q.shape != (N_PRINCIPLES,):
        raise ValueError(f"principle vectors must have {N_PRINCIPLES} entries")
    return float(1.0 - np.dot(w, np.abs(p - q)) / w.sum())


def _values(per_learner: Mapping[int, float] | Sequence[float]) -> np.ndarray:
    vals = per_learner.values() if isinstance(per_learner, Mapping) else per_learner
    arr = np.fromiter((float(v) for v in vals), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("no learners to aggregate")
    return arr


def population_consistency(per_learner: Mapping[int, float] | Sequence[float]) -> float:
    return float(_values(per_learner).mean())


def equality(per_learner: Mapping[int, float] | Sequence[float]) -> float:
    """One minus the Gini index of the per-learner consistencies."""
    arr = _values(per_learner)
    if (arr < 0).any() or (arr > 1).any():
        raise ValueError("consistencies must lie in [0, 1]")
    return 1.0 - gini(arr)


@dataclass(frozen=True)
class ConsistencyReport:
    per_learner: Mapping[int, float]
    population_mean: float
    equality: float

    @classmethod
    def from_values(cls, per_learner: Mapping[int, float]) -> ConsistencyReport:
        return cls(
            per_learner=dict(per_learner),
            population_mean=population_consistency(per_learner),
            equality=equality(per_learner),
        )


def profile_consistency(learner_id: int, train, p, w, ctx: PrincipleContext | None = None) -> float:
    """Consistency of the learner's own training courses against the targets.

    ``train`` is the training :class:`~eduequity.catalog.Dataset` or its
    feedback matrix; ``ctx`` defaults to one derived from ``train``.
    """
    from .catalog import Dataset, build_feedback_matrix

    feedback = build_feedback_matrix(train) if isinstance(train, Dataset) else train
    if ctx is None:
        if not isinstance(train, Dataset):
            raise ValueError("a PrincipleContext is required when passing a feedback matrix")
        ctx = PrincipleContext.from_dataset(train, feedback)
    items = feedback.items_of(learner_id)
    if items.size == 0:
        raise ValueError(f"learner {learner_id} has an empty training profile")
    profile = ctx.lookup(items)
    return consistency(p, evaluate_all(profile, profile, ctx), w)


def ndcg(ranked: Sequence[int], relevant, k: int) -> float:
    """Binary-relevance NDCG@k; the ideal list holds ``min(k, |relevant|)`` hits."""
    if k < 1:
        raise ValueError("k must be >= 1")
    relevant = set(relevant)
    if not relevant:
        return 0.0
    dcg = sum(1.0 / math.log2(pos + 2) for pos, item in enumerate(list(ranked)[:k]) if item in relevant)
    if dcg == 0.0:
        return 0.0
    ideal = sum(1.0 / math.log2(pos + 2) for pos in range(min(k, len(relevant))))
    return dcg / ideal
