"""Course catalog, interaction log, synthetic corpus and the fixed-timestamp split.

The on-disk format is a pair of CSV files:

``courses.csv``
    ``id,category,last_update,level,asset_types,enrolments,price,description``
    where ``asset_types`` is a ``|``-separated token list.

``interactions.csv``
    ``learner_id,course_id,rating,timestamp``

Timestamps are integer epoch seconds.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp

COURSE_COLUMNS = (
    "id",
    "category",
    "last_update",
    "level",
    "asset_types",
    "enrolments",
    "price",
    "description",
)
INTERACTION_COLUMNS = ("learner_id", "course_id", "rating", "timestamp")

ASSET_TYPES = ("Video", "Article", "Ebook", "Podcast")
LEVELS = ("Beginner", "Intermediate", "Expert", "All Levels")

_CATEGORY_NAMES = (
    "Development",
    "Business",
    "Finance & Accounting",
    "IT & Software",
    "Office Productivity",
    "Personal Development",
    "Design",
    "Marketing",
    "Lifestyle",
    "Photography",
    "Health & Fitness",
    "Music",
    "Teaching & Academics",
)


class CatalogError(ValueError):
    """Raised for malformed catalog files or violated dataset invariants."""


@dataclass(frozen=True)
class Course:
    id: int
    category: str
    last_update: int
    level: str
    asset_types: tuple[str, ...]
    enrolments: int
    price: float
    description: str = ""
    mean_rating: float | None = None


@dataclass(frozen=True)
class Interaction:
    learner_id: int
    course_id: int
    rating: float
    timestamp: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable courses + interaction log with platform-level bounds.

    Interactions are stored column-wise as numpy arrays; iterate
    :attr:`interactions` for row objects.
    """

    courses: Mapping[int, Course]
    learner_ids: np.ndarray
    course_ids: np.ndarray
    ratings: np.ndarray
    timestamps: np.ndarray
    rating_bounds: tuple[float, float]
    platform_open: int
    platform_now: int
    taxonomy: tuple[str, ...]
    levels: tuple[str, ...]
    asset_universe: tuple[str, ...] = ASSET_TYPES
    enrolment_bounds: tuple[int, int] = (0, 0)
    price_bounds: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        for name in ("learner_ids", "course_ids", "timestamps"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ratings = np.asarray(self.ratings, dtype=np.float64)
        ratings.setflags(write=False)
        object.__setattr__(self, "ratings", ratings)
        self._validate()

    def _validate(self) -> None:
        n = len(self.learner_ids)
        if not (len(self.course_ids) == len(self.ratings) == len(self.timestamps) == n):
            raise CatalogError("interaction columns have different lengths")
        if self.platform_open >= self.platform_now:
            raise CatalogError(
                f"platform_open ({self.platform_open}) must precede platform_now ({self.platform_now})"
            )
        lo, hi = self.rating_bounds
        if lo > hi:
            raise CatalogError(f"invalid rating bounds {self.rating_bounds}")
        if n:
            known = np.fromiter(self.courses.keys(), dtype=np.int64, count=len(self.courses))
            dangling = np.setdiff1d(self.course_ids, known)
            if dangling.size:
                raise CatalogError(
                    "interactions reference unknown course ids: "
                    + ", ".join(str(i) for i in dangling[:20])
                )
            if self.ratings.min() < lo or self.ratings.max() > hi:
                raise CatalogError(f"ratings outside bounds {self.rating_bounds}")
            if self.timestamps.min() < self.platform_open or self.timestamps.max() > self.platform_now:
                raise CatalogError("interaction timestamps outside [platform_open, platform_now]")
        taxonomy = set(self.taxonomy)
        levels = set(self.levels)
        universe = set(self.asset_universe)
        for c in self.courses.values():
            if c.category not in taxonomy:
                raise CatalogError(f"course {c.id}: category {c.category!r} not in taxonomy")
            if c.level not in levels:
                raise CatalogError(f"course {c.id}: level {c.level!r} not in level set")
            if not c.asset_types:
                raise CatalogError(f"course {c.id}: asset_types is empty")
            if not set(c.asset_types) <= universe:
                raise CatalogError(f"course {c.id}: unknown asset types {c.asset_types}")
            if c.price < 0 or c.enrolments < 0:
                raise CatalogError(f"course {c.id}: negative price or enrolments")
            if not self.platform_open <= c.last_update <= self.platform_now:
                raise CatalogError(f"course {c.id}: last_update outside platform lifetime")

    # -- views -----------------------------------------------------------------

    @property
    def interactions(self) -> Iterator[Interaction]:
        for u, i, r, t in zip(
            self.learner_ids.tolist(),
            self.course_ids.tolist(),
            self.ratings.tolist(),
            self.timestamps.tolist(),
        ):
            yield Interaction(u, i, r, t)

    @property
    def learners(self) -> np.ndarray:
        return np.unique(self.learner_ids)

    @property
    def course_index(self) -> np.ndarray:
        """Sorted course ids; position = column in the feedback matrix."""
        return np.array(sorted(self.courses), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.learner_ids)

    def subset(self, mask: np.ndarray) -> Dataset:
        """Same catalog and bounds, interactions filtered by a boolean mask."""
        return Dataset(
            courses=self.courses,
            learner_ids=self.learner_ids[mask],
            course_ids=self.course_ids[mask],
            ratings=self.ratings[mask],
            timestamps=self.timestamps[mask],
            rating_bounds=self.rating_bounds,
            platform_open=self.platform_open,
            platform_now=self.platform_now,
            taxonomy=self.taxonomy,
            levels=self.levels,
            asset_universe=self.asset_universe,
            enrolment_bounds=self.enrolment_bounds,
            price_bounds=self.price_bounds,
        )


def make_dataset(
    courses: Mapping[int, Course] | list[Course],
    interactions: list[Interaction] | None = None,
    **overrides: Any,
) -> Dataset:
    """Build a :class:`Dataset`, inferring any bound not given in ``overrides``.

    Recognised overrides: ``rating_min``, ``rating_max``, ``platform_open``,
    ``platform_now``, ``enrolments_min``, ``enrolments_max``, ``price_min``,
    ``price_max``, ``taxonomy``, ``levels``, ``asset_types``.
    """
    if not isinstance(courses, Mapping):
        courses = {c.id: c for c in courses}
    if not courses:
        raise CatalogError("catalog has no courses")
    interactions = list(interactions or [])
    unknown = set(overrides) - set(_BOUND_KEYS)
    if unknown:
        raise CatalogError(f"unknown bounds keys: {sorted(unknown)}")

    learners = np.array([x.learner_id for x in interactions], dtype=np.int64)
    items = np.array([x.course_id for x in interactions], dtype=np.int64)
    ratings = np.array([x.rating for x in interactions], dtype=np.float64)
    stamps = np.array([x.timestamp for x in interactions], dtype=np.int64)
    return _assemble(courses, learners, items, ratings, stamps, overrides)


_BOUND_KEYS = (
    "rating_min",
    "rating_max",
    "platform_open",
    "platform_now",
    "enrolments_min",
    "enrolments_max",
    "price_min",
    "price_max",
    "taxonomy",
    "levels",
    "asset_types",
)


def _assemble(courses, learners, items, ratings, stamps, cfg) -> Dataset:
    updates = [c.last_update for c in courses.values()]
    all_times = updates + stamps.tolist()
    if ratings.size:
        r_lo, r_hi = float(ratings.min()), float(ratings.max())
    else:
        r_lo, r_hi = 0.0, 1.0
    enrol = [c.enrolments for c in courses.values()]
    price = [c.price for c in courses.values()]
    taxonomy = cfg.get("taxonomy") or sorted({c.category for c in courses.values()})
    levels = cfg.get("levels") or sorted({c.level for c in courses.values()})
    universe = cfg.get("asset_types") or ASSET_TYPES
    return Dataset(
        courses=dict(sorted(courses.items())),
        learner_ids=learners,
        course_ids=items,
        ratings=ratings,
        timestamps=stamps,
        rating_bounds=(float(cfg.get("rating_min", r_lo)), float(cfg.get("rating_max", r_hi))),
        platform_open=int(cfg.get("platform_open", min(all_times))),
        platform_now=int(cfg.get("platform_now", max(all_times))),
        taxonomy=tuple(taxonomy),
        levels=tuple(levels),
        asset_universe=tuple(universe),
        enrolment_bounds=(
            int(cfg.get("enrolments_min", min(enrol))),
            int(cfg.get("enrolments_max", max(enrol))),
        ),
        price_bounds=(float(cfg.get("price_min", min(price))), float(cfg.get("price_max", max(price)))),
    )


# -- CSV ingestion ------------------------------------------------------------


def _read_rows(path: Path, columns: tuple[str, ...]) -> Iterator[tuple[int, dict[str, str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = tuple(reader.fieldnames or ())
        missing = [c for c in columns if c not in header]
        if missing:
            raise CatalogError(f"{path.name}: header is missing columns {missing}")
        for row in reader:
            # line numbers are 1-based and count the header
            yield reader.line_num, row


def _parse(path: Path, line: int, row: dict[str, str], name: str, kind):
    raw = row.get(name)
    if raw is None or raw.strip() == "":
        raise CatalogError(f"{path.name} line {line}: field {name!r} is empty")
    try:
        value = kind(raw.strip())
    except ValueError:
        raise CatalogError(f"{path.name} line {line}: field {name!r} has invalid value {raw!r}") from None
    if isinstance(value, float) and not math.isfinite(value):
        raise CatalogError(f"{path.name} line {line}: field {name!r} is not finite")
    return value


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


def load_catalog(
    courses_path: str | Path,
    interactions_path: str | Path,
    bounds: Mapping[str, Any] | str | Path | None = None,
) -> Dataset:
    """Read ``courses.csv`` and ``interactions.csv`` into a validated :class:`Dataset`.

    ``bounds`` is either a mapping or the path of a JSON document with the
    override keys accepted by :func:`make_dataset`.
    """
    courses_path = Path(courses_path)
    interactions_path = Path(interactions_path)
    if isinstance(bounds, (str, Path)):
        bounds = json.loads(Path(bounds).read_text(encoding="utf-8"))
    bounds = dict(bounds or {})

    courses: dict[int, Course] = {}
    for line, row in _read_rows(courses_path, COURSE_COLUMNS):
        cid = _parse(courses_path, line, row, "id", _int)
        if cid in courses:
            raise CatalogError(f"{courses_path.name} line {line}: duplicate course id {cid}")
        assets = tuple(t.strip() for t in (row.get("asset_types") or "").split("|") if t.strip())
        if not assets:
            raise CatalogError(f"{courses_path.name} line {line}: field 'asset_types' is empty")
        courses[cid] = Course(
            id=cid,
            category=_parse(courses_path, line, row, "category", str),
            last_update=_parse(courses_path, line, row, "last_update", _int),
            level=_parse(courses_path, line, row, "level", str),
            asset_types=assets,
            enrolments=_parse(courses_path, line, row, "enrolments", _int),
            price=_parse(courses_path, line, row, "price", float),
            description=row.get("description") or "",
        )

    learners, items, ratings, stamps = [], [], [], []
    for line, row in _read_rows(interactions_path, INTERACTION_COLUMNS):
        learners.append(_parse(interactions_path, line, row, "learner_id", _int))
        items.append(_parse(interactions_path, line, row, "course_id", _int))
        ratings.append(_parse(interactions_path, line, row, "rating", float))
        stamps.append(_parse(interactions_path, line, row, "timestamp", _int))

    return _assemble(
        courses,
        np.array(learners, dtype=np.int64),
        np.array(items, dtype=np.int64),
        np.array(ratings, dtype=np.float64),
        np.array(stamps, dtype=np.int64),
        bounds,
    )


def write_catalog(d: Dataset, courses_path: str | Path, interactions_path: str | Path) -> None:
    with open(courses_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COURSE_COLUMNS)
        for c in d.courses.values():
            w.writerow(
                [c.id, c.category, c.last_update, c.level, "|".join(c.asset_types),
                 c.enrolments, repr(float(c.price)), c.description]
            )
    with open(interactions_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INTERACTION_COLUMNS)
        for x in d.interactions:
            w.writerow([x.learner_id, x.course_id, repr(float(x.rating)), x.timestamp])


# -- feedback matrix ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FeedbackMatrix:
    """Learner x course matrix R; one entry per (learner, course) pair.

    ``binary`` holds ones on the interaction pattern, ``ratings`` holds the
    rating of the latest interaction on the same sparsity structure.
    """

    learners: np.ndarray
    courses: np.ndarray
    binary: sp.csr_matrix
    ratings: sp.csr_matrix
    _row: dict[int, int] = field(repr=False)
    _col: dict[int, int] = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.binary.shape

    @property
    def nnz(self) -> int:
        return self.binary.nnz

    def row_of(self, learner_id: int) -> int:
        try:
            return self._row[learner_id]
        except KeyError:
            raise KeyError(f"unknown learner {learner_id}") from None

    def col_of(self, course_id: int) -> int:
        try:
            return self._col[course_id]
        except KeyError:
            raise KeyError(f"unknown course {course_id}") from None

    def items_of(self, learner_id: int) -> np.ndarray:
        """Course ids the learner interacted with (I_u), ascending."""
        if learner_id not in self._row:
            return np.empty(0, dtype=np.int64)
        r = self._row[learner_id]
        cols = self.binary.indices[self.binary.indptr[r]:self.binary.indptr[r + 1]]
        return self.courses[np.sort(cols)]

    def users_of(self, course_id: int) -> np.ndarray:
        """Learner ids who interacted with the course (U_i), ascending."""
        c = self._col[course_id]
        rows = self.binary[:, c].nonzero()[0]
        return self.learners[np.sort(rows)]

    def item_popularity(self) -> np.ndarray:
        """Interaction counts per course column."""
        return np.asarray(self.binary.sum(axis=0)).ravel()

    def course_rating_means(self) -> np.ndarray:
        """Mean rating per course column; NaN for courses nobody rated."""
        counts = self.item_popularity()
        sums = np.asarray(self.ratings.sum(axis=0)).ravel()
        out = np.full(len(self.courses), np.nan)
        seen = counts > 0
        out[seen] = sums[seen] / counts[seen]
        return out

    @cached_property
    def mean_by_course(self) -> dict[int, float]:
        """``course_id -> mean rating`` for every rated course."""
        means = self.course_rating_means()
        return {int(c): float(m) for c, m in zip(self.courses, means) if not np.isnan(m)}

    @cached_property
    def global_mean(self) -> float:
        return float(self.ratings.data.mean())


def build_feedback_matrix(d: Dataset) -> FeedbackMatrix:
    """Sparse R over every learner in the log and every catalog course.

    Duplicate (learner, course) pairs keep the latest interaction by
    timestamp; equal timestamps keep the later row.
    """
    if len(d) == 0:
        raise CatalogError("cannot build a feedback matrix from an empty interaction log")
    learners = d.learners
    courses = d.course_index
    rows = np.searchsorted(learners, d.learner_ids)
    cols = np.searchsorted(courses, d.course_ids)

    # stable sort by (row, col, timestamp); the last of each run wins
    order = np.lexsort((np.arange(len(d)), d.timestamps, cols, rows))
    rows, cols, vals = rows[order], cols[order], d.ratings[order]
    last = np.ones(len(rows), dtype=bool)
    last[:-1] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
    rows, cols, vals = rows[last], cols[last], vals[last]

    shape = (len(learners), len(courses))
    indptr = np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=shape[0]))))
    binary = sp.csr_matrix((np.ones(len(rows)), cols, indptr), shape=shape)
    ratings = sp.csr_matrix((vals.astype(np.float64), cols.copy(), indptr.copy()), shape=shape)
    return FeedbackMatrix(
        learners=learners,
        courses=courses,
        binary=binary,
        ratings=ratings,
        _row={int(u): k for k, u in enumerate(learners)},
        _col={int(c): k for k, c in enumerate(courses)},
    )


# -- fixed-timestamp split ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrainTestSplit:
    split_timestamp: int
    train: Dataset
    test: Mapping[int, frozenset[int]]
    n_learners: int
    n_courses: int
    n_interactions: int

    @property
    def learners(self) -> list[int]:
        """Learners retained for evaluation, ascending."""
        return sorted(self.test)


def fixed_timestamp_split(d: Dataset, t_split: int, min_train: int = 4, min_test: int = 1) -> TrainTestSplit:
    """Partition the log at ``t_split``: train is strictly before, test at or after.

    Every learner stays in ``train`` for model fitting; only learners with at
    least ``min_train`` distinct train courses and ``min_test`` held-out
    courses (not already in their train profile) are evaluated.
    """
    if not d.platform_open <= t_split <= d.platform_now:
        raise CatalogError(f"split timestamp {t_split} outside platform lifetime")
    if min_train < 1 or min_test < 1:
        raise CatalogError("min_train and min_test must be >= 1")

    before = d.timestamps < t_split
    train = d.subset(before)

    train_items: dict[int, set[int]] = {}
    for u, i in zip(train.learner_ids.tolist(), train.course_ids.tolist()):
        train_items.setdefault(u, set()).add(i)
    test_items: dict[int, set[int]] = {}
    for u, i in zip(d.learner_ids[~before].tolist(), d.course_ids[~before].tolist()):
        if i not in train_items.get(u, ()):
            test_items.setdefault(u, set()).add(i)

    test = {
        u: frozenset(items)
        for u, items in sorted(test_items.items())
        if len(items) >= min_test and len(train_items.get(u, ())) >= min_train
    }
    if not test:
        raise CatalogError("split leaves no evaluable learners")

    n_courses: set[int] = set()
    n_pairs = 0
    for u, held in test.items():
        seen = train_items[u] | held
        n_courses |= seen
        n_pairs += len(seen)
    return TrainTestSplit(
        split_timestamp=int(t_split),
        train=train,
        test=test,
        n_learners=len(test),
        n_courses=len(n_courses),
        n_interactions=n_pairs,
    )


# -- synthetic corpus ---------------------------------------------------------


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of the synthetic course platform.

    ``density`` is the expected fraction of the catalog each learner
    interacts with; ``popularity_skew`` is the Zipf exponent of course
    popularity (0 = uniform); ``category_affinity`` in [0, 1] mixes the
    popularity-only choice model with a per-learner category preference.
    """

    n_learners: int = 500
    n_courses: int = 200
    n_categories: int = 10
    density: float = 0.05
    popularity_skew: float = 1.0
    category_skew: float = 1.0
    category_affinity: float = 0.7
    taste_concentration: float = 0.3
    t_start: int = 1_420_070_400  # 2015-01-01
    t_end: int = 1_514_764_800  # 2018-01-01
    min_interactions: int = 4
    rating_min: float = 1.0
    rating_max: float = 5.0
    free_fraction: float = 0.2
    max_price: float = 200.0
    levels: tuple[str, ...] = LEVELS
    asset_types: tuple[str, ...] = ASSET_TYPES

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> GeneratorConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise CatalogError(f"unknown generator keys: {sorted(unknown)}")
        values = dict(raw)
        for key in ("levels", "asset_types"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(**values)


_SYLLABLES = ("ka", "lo", "mi", "tur", "sen", "va", "dor", "pel", "qui", "rax", "no", "bel", "fi", "gan")
_GENERIC_WORDS = (
    "course", "learn", "complete", "guide", "practical", "beginners", "master",
    "hands", "projects", "skills", "introduction", "advanced", "step", "real", "world",
)


def _word(rng: np.random.Generator) -> str:
    return "".join(rng.choice(_SYLLABLES, size=rng.integers(2, 4)))


def generate_synthetic(config: GeneratorConfig | None = None, seed: int = 0) -> Dataset:
    """Sample a schema-compatible course platform.

    Deterministic for a fixed ``(config, seed)``.
    """
    cfg = config or GeneratorConfig()
    if cfg.n_learners < 1 or cfg.n_courses < 1 or cfg.n_categories < 1:
        raise CatalogError("generator sizes must be positive")
    mean_per_learner = cfg.density * cfg.n_courses
    if mean_per_learner < cfg.min_interactions:
        raise CatalogError(
            f"density {cfg.density} gives {mean_per_learner:.2f} interactions per learner, "
            f"below the minimum of {cfg.min_interactions}"
        )
    if mean_per_learner > cfg.n_courses:
        raise CatalogError("density above 1")
    if not 0.0 <= cfg.category_affinity <= 1.0:
        raise CatalogError("category_affinity must lie in [0, 1]")
    rng = np.random.default_rng(seed)

    taxonomy = tuple(
        _CATEGORY_NAMES[g] if g < len(_CATEGORY_NAMES) else f"Category {g + 1}"
        for g in range(cfg.n_categories)
    )
    vocab = [[_word(rng) for _ in range(12)] for _ in taxonomy]

    n = cfg.n_courses
    ranks = rng.permutation(n) + 1
    popularity = ranks.astype(float) ** (-cfg.popularity_skew)
    popularity /= popularity.sum()

    shares = np.arange(1, cfg.n_categories + 1, dtype=float) ** (-cfg.category_skew)
    shares /= shares.sum()
    category = rng.choice(cfg.n_categories, size=n, p=shares)
    level_p = np.array([0.35, 0.25, 0.1, 0.3][: len(cfg.levels)] + [0.1] * max(0, len(cfg.levels) - 4))
    level = rng.choice(len(cfg.levels), size=n, p=level_p / level_p.sum())
    asset_p = np.array([0.9, 0.5, 0.25, 0.1][: len(cfg.asset_types)] + [0.2] * max(0, len(cfg.asset_types) - 4))
    span = cfg.t_end - cfg.t_start
    last_update = cfg.t_start + rng.integers(0, span + 1, size=n)
    # popular courses draw bigger classes
    enrol_scale = 1000.0 * popularity * n
    enrolments = np.maximum(0, np.round(enrol_scale * rng.lognormal(0.0, 0.6, size=n))).astype(np.int64)
    free = rng.random(n) < cfg.free_fraction
    price = np.where(free, 0.0, np.round(rng.uniform(10.0, cfg.max_price, size=n), 2))
    quality = rng.normal(0.75, 0.12, size=n)

    courses: dict[int, Course] = {}
    for i in range(n):
        picked = rng.random(len(cfg.asset_types)) < asset_p
        if not picked.any():
            picked[rng.integers(len(cfg.asset_types))] = True
        words = list(rng.choice(vocab[category[i]], size=6)) + list(rng.choice(_GENERIC_WORDS, size=3))
        rng.shuffle(words)
        courses[i] = Course(
            id=i,
            category=taxonomy[category[i]],
            last_update=int(last_update[i]),
            level=cfg.levels[level[i]],
            asset_types=tuple(t for t, keep in zip(cfg.asset_types, picked) if keep),
            enrolments=int(enrolments[i]),
            price=float(price[i]),
            description=" ".join(words),
        )

    extra = mean_per_learner - cfg.min_interactions
    one_hot = np.eye(cfg.n_categories)[category]
    category_mass = one_hot.T @ popularity
    category_mass[category_mass == 0] = np.inf
    learners, items, ratings, stamps = [], [], [], []
    lo, hi = cfg.rating_min, cfg.rating_max
    for u in range(cfg.n_learners):
        count = min(n, cfg.min_interactions + int(rng.poisson(extra)))
        taste = rng.dirichlet(cfg.taste_concentration * cfg.n_categories * shares)
        # mixture: popularity alone, or a category from the taste then a course by popularity
        p = (1.0 - cfg.category_affinity) * popularity + cfg.category_affinity * popularity * (
            one_hot @ (taste / category_mass)
        )
        chosen = rng.choice(n, size=count, replace=False, p=p / p.sum())
        times = np.sort(cfg.t_start + rng.integers(0, span + 1, size=count))
        raw = lo + (hi - lo) * (quality[chosen] + rng.normal(0.0, 0.15, size=count))
        stars = np.clip(np.round(raw * 2) / 2, lo, hi)
        learners.extend([u] * count)
        items.extend(chosen.tolist())
        ratings.extend(stars.tolist())
        stamps.extend(times.tolist())

    return _assemble(
        courses,
        np.array(learners, dtype=np.int64),
        np.array(items, dtype=np.int64),
        np.array(ratings, dtype=np.float64),
        np.array(stamps, dtype=np.int64),
        {
            "rating_min": lo,
            "rating_max": hi,
            "taxonomy": taxonomy,
            "levels": cfg.levels,
            "asset_types": cfg.asset_types,
        },
    )
