"""Seven educational principles scored on a set of courses, each in [0, 1].

Every principle is oriented so that 1 is best: familiar categories, fresh
content, balanced instructional levels, many asset types, highly rated,
small classes, free of charge.

Most functions take an optional ``length``. By default a list is scored
on its own size. Passing ``length=k`` scores a partial list as a prefix of
a length-``k`` list: averaged principles divide by ``k`` and the category
distribution is ``counts / k``. At ``len(courses) == k`` both agree. The
re-ranker uses this form so that its set objective has diminishing returns
in the averaged principles.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import astuple, dataclass
from functools import cached_property

import numpy as np

from .catalog import Course, Dataset, FeedbackMatrix

PRINCIPLES = (
    "familiarity",
    "validity",
    "learnability",
    "variety",
    "quality",
    "manageability",
    "affordability",
)
N_PRINCIPLES = len(PRINCIPLES)


@dataclass(frozen=True)
class PrincipleVector:
    familiarity: float
    validity: float
    learnability: float
    variety: float
    quality: float
    manageability: float
    affordability: float

    def __post_init__(self) -> None:
        for name, value in zip(PRINCIPLES, astuple(self)):
            if not 0.0 <= value <= 1.0 or math.isnan(value):
                raise ValueError(f"{name} = {value} outside [0, 1]")

    @classmethod
    def of(cls, values: Sequence[float]) -> PrincipleVector:
        values = [float(v) for v in values]
        if len(values) != N_PRINCIPLES:
            raise ValueError(f"expected {N_PRINCIPLES} values, got {len(values)}")
        return cls(*values)

    @classmethod
    def ones(cls) -> PrincipleVector:
        return cls(*([1.0] * N_PRINCIPLES))

    def __iter__(self):
        return iter(astuple(self))

    def __getitem__(self, m: int) -> float:
        return astuple(self)[m]

    def __len__(self) -> int:
        return N_PRINCIPLES

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


# -- kernels ------------------------------------------------------------------


def _as_distribution(x, taxonomy=None) -> tuple[tuple, np.ndarray]:
    if isinstance(x, Mapping):
        keys = tuple(taxonomy) if taxonomy is not None else tuple(sorted(x))
        return keys, np.array([float(x.get(k, 0.0)) for k in keys])
    arr = np.asarray(x, dtype=np.float64)
    return tuple(range(len(arr))), arr


def hellinger(x, y) -> float:
    """Hellinger distance between two categorical distributions.

    Accepts two equal-length sequences or two mappings over the same
    category set. Mappings with different key sets are rejected.
    """
    if isinstance(x, Mapping) != isinstance(y, Mapping):
        raise ValueError("cannot compare a mapping with a sequence")
    if isinstance(x, Mapping) and set(x) != set(y):
        raise ValueError("distributions are over different taxonomies")
    keys, xa = _as_distribution(x)
    _, ya = _as_distribution(y, keys if isinstance(y, Mapping) else None)
    if xa.shape != ya.shape:
        raise ValueError("distributions are over different taxonomies")
    for arr in (xa, ya):
        if (arr < 0).any() or abs(arr.sum() - 1.0) > 1e-9:
            raise ValueError("distributions must be non-negative and sum to 1")
    return _hellinger(xa, ya)


def _hellinger(x: np.ndarray, y: np.ndarray) -> float:
    # also used with a sub-normalised y (partial lists)
    h2 = 0.5 * float(np.sum((np.sqrt(x) - np.sqrt(y)) ** 2))
    return math.sqrt(min(max(h2, 0.0), 1.0))


def gini(values) -> float:
    """Population Gini index, ``sum_ij |v_i - v_j| / (2 n^2 mean)``; 0 for an all-zero input."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise ValueError("gini of an empty sequence")
    if (v < 0).any():
        raise ValueError("gini requires non-negative values")
    total = v.sum()
    if total == 0:
        return 0.0
    n = v.size
    ranks = np.arange(1, n + 1)
    g = float(np.sum((2 * ranks - n - 1) * v) / (n * total))
    return min(max(g, 0.0), 1.0)


# -- principles ---------------------------------------------------------------


def _require(courses: Sequence[Course], length: int | None) -> int:
    if length is None:
        if not courses:
            raise ValueError("cannot score an empty course list")
        return len(courses)
    if length < len(courses) or length < 1:
        raise ValueError(f"length {length} smaller than the list ({len(courses)})")
    return length


def _bounded_mean(values: Sequence[float], lo: float, hi: float, length: int, name: str) -> float:
    """Mean of ``(v - lo) / (hi - lo)`` over ``length`` slots; 1.0 for degenerate bounds."""
    v = np.asarray(values, dtype=np.float64)
    if v.size and (v.min() < lo or v.max() > hi):
        raise ValueError(f"{name} values outside bounds [{lo}, {hi}]")
    if hi == lo:
        return v.size / length
    return float(np.sum((v - lo) / (hi - lo)) / length)


def category_distribution(courses: Sequence[Course], taxonomy: Sequence[str], length: int | None = None) -> np.ndarray:
    """Category shares over the full taxonomy (zeros on absent categories)."""
    index = {g: k for k, g in enumerate(taxonomy)}
    counts = np.zeros(len(taxonomy))
    for c in courses:
        try:
            counts[index[c.category]] += 1
        except KeyError:
            raise ValueError(f"category {c.category!r} not in taxonomy") from None
    denom = length if length is not None else counts.sum()
    return counts / denom if denom else counts


def familiarity(
    courses: Sequence[Course],
    profile: Sequence[Course],
    taxonomy: Sequence[str],
    length: int | None = None,
) -> float:
    if not profile:
        raise ValueError("familiarity needs a non-empty learner profile")
    length = _require(courses, length)
    if not courses:
        return 0.0
    x = category_distribution(profile, taxonomy)
    y = category_distribution(courses, taxonomy, length)
    return 1.0 - _hellinger(x, y)


def validity(courses: Sequence[Course], t_open: int, t_now: int, length: int | None = None) -> float:
    length = _require(courses, length)
    return _bounded_mean([c.last_update for c in courses], t_open, t_now, length, "last_update")


def learnability(courses: Sequence[Course], levels: Sequence[str], length: int | None = None) -> float:
    """``1 - gini`` of the level shares over every platform level."""
    _require(courses, length)
    if not courses:
        return 0.0
    index = {f: k for k, f in enumerate(levels)}
    counts = np.zeros(len(levels))
    for c in courses:
        try:
            counts[index[c.level]] += 1
        except KeyError:
            raise ValueError(f"level {c.level!r} not in level set") from None
    return 1.0 - gini(counts / counts.sum())


def variety(courses: Sequence[Course], asset_universe: Sequence[str], length: int | None = None) -> float:
    length = _require(courses, length)
    universe = set(asset_universe)
    total = 0.0
    for c in courses:
        kinds = set(c.asset_types)
        if not kinds or not kinds <= universe:
            raise ValueError(f"course {c.id}: asset types {c.asset_types} not a non-empty subset of {sorted(universe)}")
        total += len(kinds) / len(universe)
    return total / length


def quality(
    courses: Sequence[Course],
    ratings: FeedbackMatrix | Mapping[int, float],
    bounds: tuple[float, float],
    length: int | None = None,
    fallback: float | None = None,
) -> float:
    """Mean normalised rating of the courses.

    ``ratings`` is the feedback matrix (per-course means are derived from it)
    or a precomputed ``course_id -> mean rating`` mapping. Unrated courses
    take ``fallback``, by default the global mean rating of ``ratings``.
    """
    length = _require(courses, length)
    if isinstance(ratings, FeedbackMatrix):
        means, default = ratings.mean_by_course, ratings.global_mean
    else:
        means = ratings
        default = float(np.mean(list(ratings.values()))) if ratings else None
    if fallback is not None:
        default = fallback
    values = []
    for c in courses:
        r = means.get(c.id, default)
        if r is None:
            raise ValueError("no ratings available to score quality")
        values.append(r)
    return _bounded_mean(values, bounds[0], bounds[1], length, "rating")


def _inverted_mean(values, lo, hi, length, name) -> float:
    """Mean of ``(hi - v) / (hi - lo)``: 1 at the low bound."""
    v = np.asarray(values, dtype=np.float64)
    if v.size and (v.min() < lo or v.max() > hi):
        raise ValueError(f"{name} values outside bounds [{lo}, {hi}]")
    if hi == lo:
        return v.size / length
    return float(np.sum((hi - v) / (hi - lo)) / length)


def manageability(courses: Sequence[Course], bounds: tuple[int, int], length: int | None = None) -> float:
    length = _require(courses, length)
    return _inverted_mean([c.enrolments for c in courses], bounds[0], bounds[1], length, "enrolments")


def affordability(courses: Sequence[Course], bounds: tuple[float, float], length: int | None = None) -> float:
    length = _require(courses, length)
    return _inverted_mean([c.price for c in courses], bounds[0], bounds[1], length, "price")


# -- platform context ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PrincipleContext:
    """Platform-wide inputs shared by every learner's principle scores.

    ``mean_rating`` maps course id to its mean training rating; unrated
    courses fall back to ``global_rating``.
    """

    courses: Mapping[int, Course]
    taxonomy: tuple[str, ...]
    levels: tuple[str, ...]
    asset_universe: tuple[str, ...]
    platform_open: int
    platform_now: int
    rating_bounds: tuple[float, float]
    enrolment_bounds: tuple[int, int]
    price_bounds: tuple[float, float]
    mean_rating: Mapping[int, float]
    global_rating: float

    @classmethod
    def from_dataset(cls, d: Dataset, feedback: FeedbackMatrix | None = None) -> PrincipleContext:
        if feedback is None:
            from .catalog import build_feedback_matrix

            feedback = build_feedback_matrix(d)
        return cls(
            courses=d.courses,
            taxonomy=d.taxonomy,
            levels=d.levels,
            asset_universe=d.asset_universe,
            platform_open=d.platform_open,
            platform_now=d.platform_now,
            rating_bounds=d.rating_bounds,
            enrolment_bounds=d.enrolment_bounds,
            price_bounds=d.price_bounds,
            mean_rating=feedback.mean_by_course,
            global_rating=feedback.global_mean,
        )

    def lookup(self, course_ids) -> list[Course]:
        return [self.courses[int(i)] for i in course_ids]

    @cached_property
    def table(self) -> ItemTable:
        return ItemTable.build(self)


def evaluate_all(
    courses: Sequence[Course],
    profile: Sequence[Course],
    ctx: PrincipleContext,
    length: int | None = None,
) -> PrincipleVector:
    """All seven principle scores of ``courses`` for a learner with ``profile``."""
    _require(courses, length)
    return PrincipleVector(
        familiarity=familiarity(courses, profile, ctx.taxonomy, length),
        validity=validity(courses, ctx.platform_open, ctx.platform_now, length),
        learnability=learnability(courses, ctx.levels, length),
        variety=variety(courses, ctx.asset_universe, length),
        quality=quality(courses, ctx.mean_rating, ctx.rating_bounds, length, fallback=ctx.global_rating),
        manageability=manageability(courses, ctx.enrolment_bounds, length),
        affordability=affordability(courses, ctx.price_bounds, length),
    )


# -- vectorised per-item form -------------------------------------------------

# columns of ItemTable.additive, in principle order
ADDITIVE = ("validity", "variety", "quality", "manageability", "affordability")
ADDITIVE_INDEX = np.array([PRINCIPLES.index(p) for p in ADDITIVE])
FAMILIARITY, LEARNABILITY = PRINCIPLES.index("familiarity"), PRINCIPLES.index("learnability")


@dataclass(frozen=True, eq=False)
class ItemTable:
    """Per-course contributions used by the re-ranker's incremental scoring.

    Row ``r`` describes course ``ids[r]``: its five averaged-principle
    values, its category index and its level index.
    """

    ids: np.ndarray
    additive: np.ndarray
    category: np.ndarray
    level: np.ndarray
    n_categories: int
    n_levels: int
    _row: dict[int, int]

    @classmethod
    def build(cls, ctx: PrincipleContext) -> ItemTable:
        courses = list(ctx.courses.values())
        ids = np.array([c.id for c in courses], dtype=np.int64)
        cat = {g: k for k, g in enumerate(ctx.taxonomy)}
        lvl = {f: k for k, f in enumerate(ctx.levels)}
        additive = np.array(
            [
                [
                    validity([c], ctx.platform_open, ctx.platform_now),
                    variety([c], ctx.asset_universe),
                    quality([c], ctx.mean_rating, ctx.rating_bounds, fallback=ctx.global_rating),
                    manageability([c], ctx.enrolment_bounds),
                    affordability([c], ctx.price_bounds),
                ]
                for c in courses
            ]
        ).reshape(len(courses), len(ADDITIVE))
        return cls(
            ids=ids,
            additive=additive,
            category=np.array([cat[c.category] for c in courses], dtype=np.int64),
            level=np.array([lvl[c.level] for c in courses], dtype=np.int64),
            n_categories=len(ctx.taxonomy),
            n_levels=len(ctx.levels),
            _row={int(i): r for r, i in enumerate(ids)},
        )

    def rows(self, course_ids) -> np.ndarray:
        return np.array([self._row[int(i)] for i in course_ids], dtype=np.int64)

    def profile_distribution(self, profile_ids) -> np.ndarray:
        rows = self.rows(profile_ids)
        if rows.size == 0:
            raise ValueError("familiarity needs a non-empty learner profile")
        counts = np.bincount(self.category[rows], minlength=self.n_categories).astype(float)
        return counts / counts.sum()

    def evaluate(self, course_ids, profile_dist: np.ndarray, length: int | None = None) -> np.ndarray:
        """Vectorised counterpart of :func:`evaluate_all`, returning a length-7 array."""
        rows = self.rows(course_ids)
        n = rows.size
        if length is None:
            if n == 0:
                raise ValueError("cannot score an empty course list")
            length = n
        q = np.zeros(N_PRINCIPLES)
        if n == 0:
            return q
        q[ADDITIVE_INDEX] = self.additive[rows].sum(axis=0) / length
        cats = np.bincount(self.category[rows], minlength=self.n_categories)
        q[FAMILIARITY] = 1.0 - _hellinger(profile_dist, cats / length)
        levels = np.bincount(self.level[rows], minlength=self.n_levels)
        q[LEARNABILITY] = 1.0 - gini(levels)
        return q
