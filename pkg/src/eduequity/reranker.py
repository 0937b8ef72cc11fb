"""Greedy consistency-aware re-ranking of a recommender's candidate list.

For learner ``u`` the re-ranker picks ``k`` courses from the top of the
candidate list by greedily maximising the set objective

    f(S) = (1 - lam) * sum_{i in S} rel_i / k + lam * consistency(p_u, q_S, w)

where ``q_S`` is the principle vector of ``S`` scored as a prefix of a
length-``k`` list (see :mod:`eduequity.principles`). Both terms lie in
[0, 1]. The selection order is the output ranking.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .catalog import FeedbackMatrix
from .metrics import as_weights, consistency, equality, ndcg, population_consistency
from .principles import (
    ADDITIVE_INDEX,
    FAMILIARITY,
    LEARNABILITY,
    N_PRINCIPLES,
    PRINCIPLES,
    PrincipleContext,
    PrincipleVector,
    evaluate_all,
    gini,
)
from .recommenders import ScoredCandidates

STRATEGIES = ("Glob", "User", "Pers")
DEFAULT_LAMBDAS = (0.0, 0.25, 0.50, 0.75, 0.99)


class RerankError(ValueError):
    pass


@dataclass(frozen=True)
class RerankConfig:
    lam: float = 0.0
    k: int = 10
    candidate_pool: int = 100
    weight_strategy: str = "Glob"
    targets: PrincipleVector | Mapping[int, PrincipleVector] = field(default_factory=PrincipleVector.ones)

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise RerankError(f"lambda {self.lam} outside [0, 1]")
        if self.k < 1 or self.k > self.candidate_pool:
            raise RerankError(f"need 1 <= k ({self.k}) <= candidate_pool ({self.candidate_pool})")
        if self.weight_strategy not in STRATEGIES:
            raise RerankError(f"unknown weight strategy {self.weight_strategy!r}")

    def target_for(self, learner_id: int) -> PrincipleVector:
        if isinstance(self.targets, PrincipleVector):
            return self.targets
        try:
            return self.targets[learner_id]
        except KeyError:
            raise RerankError(f"no target principle vector for learner {learner_id}") from None


@dataclass(frozen=True, eq=False)
class RerankOutcome:
    learner_id: int
    original_topk: list[int]
    reranked_topk: list[int]
    objective_value: float
    per_principle_before: PrincipleVector
    per_principle_after: PrincipleVector


# -- weight strategies --------------------------------------------------------


def weights_glob() -> np.ndarray:
    return np.ones(N_PRINCIPLES)


def consistency_gaps(p, q) -> np.ndarray:
    """Per-principle shortfall ``max(0, p_m - q_m)``; overshoot counts as no gap."""
    return np.maximum(0.0, np.asarray(list(p), dtype=float) - np.asarray(list(q), dtype=float))


def _from_gaps(gaps) -> np.ndarray:
    gaps = np.asarray(gaps, dtype=np.float64)
    if gaps.shape != (N_PRINCIPLES,) or np.isnan(gaps).any():
        raise RerankError(f"expected {N_PRINCIPLES} consistency gaps")
    top = gaps.max()
    if top <= 0:
        return weights_glob()
    return np.clip(gaps / top, 0.0, 1.0)


def weights_user(mean_gaps) -> np.ndarray:
    """Weights proportional to the population-average gap per principle."""
    if mean_gaps is None:
        raise RerankError("User weights need the gaps of a lambda=0 baseline pass")
    return _from_gaps(mean_gaps)


def weights_pers(learner_id: int, gaps: Mapping[int, np.ndarray] | None) -> np.ndarray:
    """Weights proportional to one learner's own gaps."""
    if gaps is None or learner_id not in gaps:
        raise RerankError(f"Pers weights need a baseline pass covering learner {learner_id}")
    return _from_gaps(gaps[learner_id])


# -- objective ----------------------------------------------------------------


def set_objective(
    course_ids: Sequence[int],
    relevance: Mapping[int, float],
    ctx: PrincipleContext,
    profile: Sequence[int],
    p,
    w,
    lam: float,
    k: int,
) -> float:
    """Reference evaluation of the set objective through :func:`evaluate_all`.

    The empty set scores zero on every principle.
    """
    courses = ctx.lookup(course_ids)
    accuracy = sum(relevance[int(i)] for i in course_ids) / k
    if courses:
        q = evaluate_all(courses, ctx.lookup(profile), ctx, length=k)
    else:
        q = np.zeros(N_PRINCIPLES)
    return (1.0 - lam) * accuracy + lam * consistency(p, q, w)


class _Greedy:
    """Incremental scorer of every remaining candidate against the current selection."""

    def __init__(self, pool: ScoredCandidates, ctx: PrincipleContext, profile, p, w, lam: float, k: int):
        table = ctx.table
        rows = table.rows(pool.course_ids)
        self.ids = pool.course_ids
        self.rel = pool.relevance
        self.additive = table.additive[rows]
        self.cat = table.category[rows]
        self.lvl = table.level[rows]
        self.n_levels = table.n_levels
        self.sqrt_x = np.sqrt(table.profile_distribution(profile))
        self.p = np.asarray(list(p), dtype=np.float64)
        self.w = as_weights(w)
        self.lam = float(lam)
        self.k = k

        self.add_sum = np.zeros(self.additive.shape[1])
        self.cat_counts = np.zeros(table.n_categories)
        self.lvl_counts = np.zeros(self.n_levels)
        self.rel_sum = 0.0
        self.size = 0
        self.remaining = np.ones(len(self.ids), dtype=bool)

    def principles_with(self, cand: np.ndarray) -> np.ndarray:
        """Principle vectors of ``selection + {c}`` for each candidate row ``c``."""
        k = self.k
        q = np.empty((cand.size, N_PRINCIPLES))
        q[:, ADDITIVE_INDEX] = (self.add_sum + self.additive[cand]) / k

        g = self.cat[cand]
        bc = float(np.sum(self.sqrt_x * np.sqrt(self.cat_counts / k)))
        bc = bc + self.sqrt_x[g] * (np.sqrt((self.cat_counts[g] + 1) / k) - np.sqrt(self.cat_counts[g] / k))
        h2 = np.clip(0.5 * (1.0 + (self.size + 1) / k) - bc, 0.0, 1.0)
        q[:, FAMILIARITY] = 1.0 - np.sqrt(h2)

        options = np.empty(self.n_levels)
        for level in range(self.n_levels):
            counts = self.lvl_counts.copy()
            counts[level] += 1
            options[level] = 1.0 - gini(counts)
        q[:, LEARNABILITY] = options[self.lvl[cand]]
        return q

    def objective(self, cand: np.ndarray) -> np.ndarray:
        q = self.principles_with(cand)
        cons = 1.0 - (np.abs(self.p - q) @ self.w) / self.w.sum()
        return (1.0 - self.lam) * (self.rel_sum + self.rel[cand]) / self.k + self.lam * cons

    def take(self, row: int) -> None:
        self.remaining[row] = False
        self.add_sum += self.additive[row]
        self.cat_counts[self.cat[row]] += 1
        self.lvl_counts[self.lvl[row]] += 1
        self.rel_sum += self.rel[row]
        self.size += 1

    def run(self) -> tuple[list[int], float]:
        picked: list[int] = []
        value = 0.0
        for _ in range(self.k):
            cand = np.flatnonzero(self.remaining)
            scores = self.objective(cand)
            # candidates are ordered by (relevance desc, id asc): first max wins ties
            best = int(np.argmax(scores))
            value = float(scores[best])
            picked.append(int(cand[best]))
            self.take(int(cand[best]))
        return [int(self.ids[r]) for r in picked], value


def _pool(candidates: ScoredCandidates, cfg: RerankConfig) -> ScoredCandidates:
    pool = candidates.top(cfg.candidate_pool)
    if len(pool) < cfg.k:
        raise RerankError(
            f"learner {candidates.learner_id}: {len(pool)} candidates, need at least k={cfg.k}"
        )
    return pool


def greedy_rerank(
    candidates: ScoredCandidates,
    cfg: RerankConfig,
    w,
    p,
    ctx: PrincipleContext,
    profile: Sequence[int],
) -> RerankOutcome:
    """Pick ``cfg.k`` courses from the top ``cfg.candidate_pool`` candidates greedily.

    ``profile`` holds the learner's training course ids. Ties go to the
    higher base relevance, then the lower course id.
    """
    pool = _pool(candidates, cfg)
    chosen, value = _Greedy(pool, ctx, profile, p, w, cfg.lam, cfg.k).run()
    original = pool.course_ids[: cfg.k].tolist()
    table = ctx.table
    x = table.profile_distribution(profile)
    return RerankOutcome(
        learner_id=candidates.learner_id,
        original_topk=original,
        reranked_topk=chosen,
        objective_value=value,
        per_principle_before=PrincipleVector.of(table.evaluate(original, x)),
        per_principle_after=PrincipleVector.of(table.evaluate(chosen, x)),
    )


def exhaustive_optimum(
    candidates: ScoredCandidates,
    cfg: RerankConfig,
    w,
    p,
    ctx: PrincipleContext,
    profile: Sequence[int],
    limit: int = 12,
) -> tuple[list[int], float]:
    """Best size-``k`` subset of the pool by brute force (small pools only)."""
    pool = _pool(candidates, cfg)
    if len(pool) > limit:
        raise RerankError(f"exhaustive search limited to {limit} candidates, got {len(pool)}")
    relevance = dict(zip(pool.course_ids.tolist(), pool.relevance.tolist()))
    best, best_value = None, -math.inf
    for subset in itertools.combinations(pool.course_ids.tolist(), cfg.k):
        value = set_objective(subset, relevance, ctx, profile, p, w, cfg.lam, cfg.k)
        if value > best_value:
            best, best_value = list(subset), value
    return best, best_value


# -- sweeps -------------------------------------------------------------------

SWEEP_COLUMNS = ("lambda", "strategy", "algorithm", "ndcg", "consistency", "equality") + tuple(
    f"c_{name}" for name in PRINCIPLES
)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    strategy: str
    algorithm: str
    ndcg: float
    consistency: float
    equality: float
    per_principle: tuple[float, ...]

    def as_row(self) -> list:
        return [self.lam, self.strategy, self.algorithm, self.ndcg, self.consistency, self.equality, *self.per_principle]


def baseline_gaps(
    scores: Mapping[int, ScoredCandidates],
    cfg: RerankConfig,
    ctx: PrincipleContext,
    train: FeedbackMatrix,
) -> dict[int, np.ndarray]:
    """Per-learner principle gaps of the unmodified top-k lists."""
    table = ctx.table
    gaps = {}
    for u, cands in scores.items():
        top = cands.course_ids[: cfg.k]
        q = table.evaluate(top, table.profile_distribution(train.items_of(u)))
        gaps[u] = consistency_gaps(cfg.target_for(u), q)
    return gaps


def strategy_weights(strategy: str, learners, gaps: Mapping[int, np.ndarray] | None) -> dict[int, np.ndarray]:
    if strategy == "Glob":
        return {u: weights_glob() for u in learners}
    if gaps is None:
        raise RerankError(f"{strategy} weights need a lambda=0 baseline pass")
    if strategy == "User":
        shared = weights_user(np.mean([gaps[u] for u in learners], axis=0))
        return {u: shared for u in learners}
    if strategy == "Pers":
        return {u: weights_pers(u, gaps) for u in learners}
    raise RerankError(f"unknown weight strategy {strategy!r}")


def evaluate_lists(
    lists: Mapping[int, Sequence[int]],
    test: Mapping[int, frozenset[int]],
    weights: Mapping[int, np.ndarray],
    cfg: RerankConfig,
    ctx: PrincipleContext,
    train: FeedbackMatrix,
) -> tuple[float, dict[int, float], np.ndarray]:
    """Mean NDCG, per-learner consistency and mean per-principle consistency."""
    table = ctx.table
    ndcgs, per_learner, per_principle = [], {}, []
    for u, items in lists.items():
        q = table.evaluate(items, table.profile_distribution(train.items_of(u)))
        p = cfg.target_for(u).as_array()
        ndcgs.append(ndcg(items, test.get(u, ()), cfg.k))
        per_learner[u] = consistency(p, q, weights[u])
        per_principle.append(1.0 - np.abs(p - q))
    return float(np.mean(ndcgs)), per_learner, np.mean(per_principle, axis=0)


def lambda_sweep(
    scores: Mapping[int, ScoredCandidates],
    grid: Sequence[float],
    cfg: RerankConfig,
    ctx: PrincipleContext,
    train: FeedbackMatrix,
    test: Mapping[int, frozenset[int]],
    algorithm: str = "",
    strategies: Sequence[str] = STRATEGIES,
) -> list[SweepRow]:
    """Re-rank every learner at each lambda in ``grid`` under each weight strategy.

    The strategy's weights steer the re-ranker only; reported consistency
    and equality use unit weights so rows are comparable across strategies.
    """
    if not grid:
        raise RerankError("empty lambda grid")
    learners = sorted(scores)
    gaps = baseline_gaps(scores, cfg, ctx, train)
    uniform = {u: weights_glob() for u in learners}
    rows = []
    for strategy in strategies:
        weights = strategy_weights(strategy, learners, gaps)
        for lam in grid:
            step = RerankConfig(lam, cfg.k, cfg.candidate_pool, strategy, cfg.targets)
            lists = {
                u: greedy_rerank(scores[u], step, weights[u], step.target_for(u), ctx, train.items_of(u)).reranked_topk
                for u in learners
            }
            acc, per_learner, per_principle = evaluate_lists(lists, test, uniform, step, ctx, train)
            rows.append(
                SweepRow(
                    lam=float(lam),
                    strategy=strategy,
                    algorithm=algorithm,
                    ndcg=acc,
                    consistency=population_consistency(per_learner),
                    equality=equality(per_learner),
                    per_principle=tuple(float(v) for v in per_principle),
                )
            )
    return rows


def tradeoff(rows: Sequence[SweepRow]) -> list[dict]:
    """NDCG loss against consistency / equality gain, relative to lambda = 0."""
    base = {(r.strategy, r.algorithm): r for r in rows if r.lam == 0.0}
    out = []
    for r in rows:
        ref = base.get((r.strategy, r.algorithm))
        if ref is None or r.lam == 0.0:
            continue
        out.append(
            {
                "lambda": r.lam,
                "strategy": r.strategy,
                "algorithm": r.algorithm,
                "ndcg_loss": ref.ndcg - r.ndcg,
                "consistency_gain": r.consistency - ref.consistency,
                "equality_gain": r.equality - ref.equality,
            }
        )
    return out
