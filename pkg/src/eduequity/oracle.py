"""Small re-ranking instances: JSON I/O, random generation, greedy vs exhaustive.

Instance document::

    {
      "k": 3, "lambda": 0.5,
      "targets": [7 floats], "weights": [7 floats],
      "platform": {"platform_open": int, "platform_now": int,
                   "rating_min": float, "rating_max": float,
                   "enrolments_min": int, "enrolments_max": int,
                   "price_min": float, "price_max": float,
                   "taxonomy": [...], "levels": [...], "asset_types": [...]},
      "courses": [{"id", "category", "last_update", "level", "asset_types",
                   "enrolments", "price", "mean_rating"}, ...],
      "profile": [course ids],
      "candidates": [{"course_id": int, "relevance": float}, ...]
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import ASSET_TYPES, LEVELS, Course
from .principles import N_PRINCIPLES, PrincipleContext, PrincipleVector
from .recommenders import ScoredCandidates
from .reranker import RerankConfig, RerankError, exhaustive_optimum, greedy_rerank

MAX_ORACLE_CANDIDATES = 12
GREEDY_BOUND = 1.0 - 1.0 / math.e


@dataclass(frozen=True, eq=False)
class Instance:
    candidates: ScoredCandidates
    config: RerankConfig
    weights: np.ndarray
    targets: PrincipleVector
    context: PrincipleContext
    profile: tuple[int, ...]

    @property
    def relevance(self) -> dict[int, float]:
        return dict(zip(self.candidates.course_ids.tolist(), self.candidates.relevance.tolist()))


def _context(courses: dict[int, Course], platform: dict) -> PrincipleContext:
    rated = {c.id: c.mean_rating for c in courses.values() if c.mean_rating is not None}
    rating_min, rating_max = float(platform["rating_min"]), float(platform["rating_max"])
    return PrincipleContext(
        courses=courses,
        taxonomy=tuple(platform["taxonomy"]),
        levels=tuple(platform["levels"]),
        asset_universe=tuple(platform.get("asset_types", ASSET_TYPES)),
        platform_open=int(platform["platform_open"]),
        platform_now=int(platform["platform_now"]),
        rating_bounds=(rating_min, rating_max),
        enrolment_bounds=(int(platform["enrolments_min"]), int(platform["enrolments_max"])),
        price_bounds=(float(platform["price_min"]), float(platform["price_max"])),
        mean_rating=rated,
        global_rating=float(np.mean(list(rated.values()))) if rated else (rating_min + rating_max) / 2,
    )


def instance_from_dict(doc: dict) -> Instance:
    courses = {
        int(c["id"]): Course(
            id=int(c["id"]),
            category=c["category"],
            last_update=int(c["last_update"]),
            level=c["level"],
            asset_types=tuple(c["asset_types"]),
            enrolments=int(c["enrolments"]),
            price=float(c["price"]),
            mean_rating=None if c.get("mean_rating") is None else float(c["mean_rating"]),
        )
        for c in doc["courses"]
    }
    cands = doc["candidates"]
    if len(cands) > MAX_ORACLE_CANDIDATES:
        raise RerankError(f"oracle instances hold at most {MAX_ORACLE_CANDIDATES} candidates, got {len(cands)}")
    # relevance is used as given, only the order is normalised
    given = {int(c["course_id"]): float(c["relevance"]) for c in cands}
    order = sorted(given, key=lambda i: (-given[i], i))
    ranked = ScoredCandidates(
        int(doc.get("learner_id", 0)),
        np.array(order, dtype=np.int64),
        np.array([given[i] for i in order]),
    )
    k = int(doc["k"])
    return Instance(
        candidates=ranked,
        config=RerankConfig(lam=float(doc["lambda"]), k=k, candidate_pool=max(k, len(cands))),
        weights=np.asarray(doc.get("weights", [1.0] * N_PRINCIPLES), dtype=np.float64),
        targets=PrincipleVector.of(doc.get("targets", [1.0] * N_PRINCIPLES)),
        context=_context(courses, doc["platform"]),
        profile=tuple(int(i) for i in doc["profile"]),
    )


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def random_instance_dict(
    rng: np.random.Generator,
    n: int = 8,
    k: int = 3,
    lam: float = 0.5,
    n_categories: int = 4,
    profile_size: int = 4,
    random_targets: bool = False,
) -> dict:
    """A random small instance: ``n`` candidates plus a separate learner profile."""
    taxonomy = [f"g{g}" for g in range(n_categories)]
    t_open, t_now = 0, 1000
    courses = []
    for cid in range(n + profile_size):
        picked = [t for t in ASSET_TYPES if rng.random() < 0.5] or [ASSET_TYPES[int(rng.integers(4))]]
        courses.append(
            {
                "id": cid,
                "category": taxonomy[int(rng.integers(n_categories))],
                "last_update": int(rng.integers(t_open, t_now + 1)),
                "level": LEVELS[int(rng.integers(len(LEVELS)))],
                "asset_types": picked,
                "enrolments": int(rng.integers(0, 5001)),
                "price": float(np.round(rng.uniform(0, 200), 2)),
                "mean_rating": float(np.round(rng.uniform(1, 5), 1)),
            }
        )
    rel = rng.random(n)
    rel = (rel - rel.min()) / (rel.max() - rel.min())
    targets = rng.random(N_PRINCIPLES).round(3).tolist() if random_targets else [1.0] * N_PRINCIPLES
    return {
        "k": k,
        "lambda": lam,
        "targets": targets,
        "weights": [1.0] * N_PRINCIPLES,
        "platform": {
            "platform_open": t_open,
            "platform_now": t_now,
            "rating_min": 1.0,
            "rating_max": 5.0,
            "enrolments_min": 0,
            "enrolments_max": 5000,
            "price_min": 0.0,
            "price_max": 200.0,
            "taxonomy": taxonomy,
            "levels": list(LEVELS),
            "asset_types": list(ASSET_TYPES),
        },
        "courses": courses,
        "profile": list(range(n, n + profile_size)),
        "candidates": [{"course_id": i, "relevance": float(rel[i])} for i in range(n)],
    }


@dataclass(frozen=True)
class OracleReport:
    greedy: list[int]
    greedy_value: float
    optimum: list[int]
    optimum_value: float

    @property
    def ratio(self) -> float:
        if self.optimum_value == 0:
            return 1.0
        return self.greedy_value / self.optimum_value

    @property
    def meets_bound(self) -> bool:
        return self.greedy_value >= GREEDY_BOUND * self.optimum_value


def compare(inst: Instance) -> OracleReport:
    """Greedy selection against the exhaustive optimum of the same objective."""
    out = greedy_rerank(inst.candidates, inst.config, inst.weights, inst.targets, inst.context, inst.profile)
    best, best_value = exhaustive_optimum(
        inst.candidates, inst.config, inst.weights, inst.targets, inst.context, inst.profile,
        limit=MAX_ORACLE_CANDIDATES,
    )
    return OracleReport(out.reranked_topk, out.objective_value, best, best_value)
