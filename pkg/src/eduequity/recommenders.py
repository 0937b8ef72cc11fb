"""Baseline recommenders producing per-learner relevance over unseen courses.

Every scorer follows the same contract: raw scores over all catalog
courses, training courses removed, min-max normalised to [0, 1] per
learner, sorted by relevance (descending) then course id (ascending).
A learner whose raw scores are all zero gets the TopPopular ordering.
"""

from __future__ import annotations

import csv
from collections.abc import Mapping
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.preprocessing import normalize

from .catalog import Dataset, FeedbackMatrix, build_feedback_matrix

ALGORITHMS = ("Random", "TopPopular", "UserKNN", "ItemKNN", "ItemKNN-CB", "P3Alpha", "RP3Beta")

SCORE_COLUMNS = ("learner_id", "course_id", "relevance")

# tuned values reported for the course platform
DEFAULTS = {
    "Random": {},
    "TopPopular": {},
    "UserKNN": {"neighbors": 100},
    "ItemKNN": {"neighbors": 100},
    "ItemKNN-CB": {},
    "P3Alpha": {"alpha": 0.8, "neighbors": 200},
    "RP3Beta": {"alpha": 0.6, "beta": 0.3, "neighbors": 200},
}


class RecommenderError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    algorithm: str
    neighbors: int = 100
    similarity: str = "cosine"
    alpha: float = 1.0
    beta: float = 0.0
    candidate_pool: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise RecommenderError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.neighbors < 1:
            raise RecommenderError("neighbors must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise RecommenderError("alpha and beta must be >= 0")
        if self.similarity != "cosine":
            raise RecommenderError(f"unsupported similarity {self.similarity!r}")

    @classmethod
    def default(cls, algorithm: str, **overrides) -> ModelConfig:
        if algorithm not in DEFAULTS:
            raise RecommenderError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
        return cls(algorithm=algorithm, **{**DEFAULTS[algorithm], **overrides})


@dataclass(frozen=True, eq=False)
class ScoredCandidates:
    """Ranked unseen courses for one learner, relevance in [0, 1]."""

    learner_id: int
    course_ids: np.ndarray
    relevance: np.ndarray

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.course_ids.tolist(), self.relevance.tolist()))

    def __len__(self) -> int:
        return len(self.course_ids)

    def top(self, n: int) -> ScoredCandidates:
        return replace(self, course_ids=self.course_ids[:n], relevance=self.relevance[:n])

    @classmethod
    def rank(cls, learner_id: int, course_ids, raw, exclude=()) -> ScoredCandidates:
        """Drop ``exclude``, min-max normalise ``raw`` and sort."""
        course_ids = np.asarray(course_ids, dtype=np.int64)
        raw = np.asarray(raw, dtype=np.float64)
        keep = ~np.isin(course_ids, np.asarray(list(exclude), dtype=np.int64))
        ids, raw = course_ids[keep], raw[keep]
        if ids.size == 0:
            return cls(learner_id, ids, raw)
        lo, hi = raw.min(), raw.max()
        rel = (raw - lo) / (hi - lo) if hi > lo else np.ones_like(raw)
        order = np.lexsort((ids, -rel))
        return cls(learner_id, ids[order], rel[order])


def _top_n_per_row(m: sp.spmatrix, n: int) -> sp.csr_matrix:
    """Keep the ``n`` largest entries of each row (ties: lower column first)."""
    m = sp.csr_matrix(m)
    m.eliminate_zeros()
    rows, cols, vals = [], [], []
    for r in range(m.shape[0]):
        start, end = m.indptr[r], m.indptr[r + 1]
        c, v = m.indices[start:end], m.data[start:end]
        if c.size > n:
            keep = np.lexsort((c, -v))[:n]
            c, v = c[keep], v[keep]
        rows.append(np.full(c.size, r))
        cols.append(c)
        vals.append(v)
    if not rows:
        return sp.csr_matrix(m.shape)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=m.shape
    )


def cosine_similarity_matrix(x: sp.spmatrix) -> sp.csr_matrix:
    """Row-wise cosine similarity of a sparse matrix, diagonal included."""
    xn = normalize(sp.csr_matrix(x, dtype=np.float64), norm="l2", axis=1)
    return sp.csr_matrix(xn @ xn.T)


def item_similarity(train: FeedbackMatrix) -> sp.csr_matrix:
    """Item-item cosine over binary interaction columns (self-similarity kept)."""
    return cosine_similarity_matrix(train.binary.T)


class Recommender:
    """Fit once on the training feedback matrix, then score learners."""

    def __init__(self, config: ModelConfig) -> None:
        self.config = config
        self.train: FeedbackMatrix | None = None

    def fit(self, train: FeedbackMatrix, catalog: Dataset | None = None) -> Recommender:
        self.train = train
        self._popularity = train.item_popularity()
        return self

    def raw_scores(self, learner_id: int) -> np.ndarray:
        raise NotImplementedError

    def _profile_row(self, learner_id: int) -> int:
        if learner_id not in self.train._row:
            raise RecommenderError(f"learner {learner_id} has an empty training profile")
        return self.train.row_of(learner_id)

    def score(self, learner_id: int, pool: int | None = None) -> ScoredCandidates:
        assert self.train is not None, "fit() first"
        seen = self.train.items_of(learner_id)
        raw = self.raw_scores(learner_id)
        unseen = ~np.isin(self.train.courses, seen)
        if raw.size and not raw[unseen].any():
            raw = self._popularity.astype(np.float64)
        out = ScoredCandidates.rank(learner_id, self.train.courses, raw, exclude=seen)
        return out.top(pool) if pool is not None else out


class RandomRecommender(Recommender):
    def raw_scores(self, learner_id: int) -> np.ndarray:
        rng = np.random.default_rng([self.config.seed, learner_id])
        return rng.random(len(self.train.courses))


class TopPopular(Recommender):
    def raw_scores(self, learner_id: int) -> np.ndarray:
        return self._popularity.astype(np.float64)


class UserKNN(Recommender):
    """``score(i) = sum over the top-N cosine neighbours v of sim(u, v) * R[v, i]`` on binary R."""

    def fit(self, train, catalog=None):
        super().fit(train, catalog)
        self._x = sp.csr_matrix(train.binary)
        self._xn = normalize(self._x, norm="l2", axis=1)
        return self

    def similarities(self, learner_id: int) -> np.ndarray:
        r = self._profile_row(learner_id)
        sims = np.asarray((self._xn @ self._xn[r].T).todense()).ravel()
        sims[r] = 0.0
        return sims

    def raw_scores(self, learner_id: int) -> np.ndarray:
        sims = self.similarities(learner_id)
        positive = np.flatnonzero(sims > 0)
        order = np.lexsort((positive, -sims[positive]))
        top = positive[order[: self.config.neighbors]]
        if top.size == 0:
            return np.zeros(self._x.shape[1])
        return np.asarray(self._x[top].T @ sims[top]).ravel()


class ItemKNN(Recommender):
    """``score(j) = sum over i in I_u of W[i, j]``, W = cosine kept to the top-N per item."""

    def fit(self, train, catalog=None):
        super().fit(train, catalog)
        s = item_similarity(train).tolil()
        s.setdiag(0.0)
        self.weights = _top_n_per_row(s, self.config.neighbors)
        return self

    def raw_scores(self, learner_id: int) -> np.ndarray:
        r = self._profile_row(learner_id)
        return np.asarray((self.train.binary[r] @ self.weights).todense()).ravel()


def tfidf_matrix(descriptions: list[str]) -> sp.csr_matrix:
    """L2-normalised TF-IDF rows, ``idf = ln(N / df) + 1``, alphanumeric tokens of length >= 2."""
    vectorizer = TfidfVectorizer(
        lowercase=True,
        token_pattern=r"(?u)[^\W_]{2,}",
        smooth_idf=False,
        sublinear_tf=False,
        norm="l2",
    )
    try:
        return sp.csr_matrix(vectorizer.fit_transform(descriptions))
    except ValueError:
        raise RecommenderError("course descriptions contain no usable tokens") from None


class ItemKNNCB(Recommender):
    """Cosine between each course and the mean TF-IDF vector of the learner's courses."""

    def fit(self, train, catalog=None):
        if catalog is None:
            raise RecommenderError("ItemKNN-CB needs the course catalog")
        super().fit(train, catalog)
        self.features = tfidf_matrix([catalog.courses[int(c)].description for c in train.courses])
        return self

    def raw_scores(self, learner_id: int) -> np.ndarray:
        r = self._profile_row(learner_id)
        seen = self.train.binary[r].indices
        profile = np.asarray(self.features[seen].mean(axis=0)).ravel()
        norm = np.linalg.norm(profile)
        if norm == 0:
            return np.zeros(self.features.shape[0])
        return self.features @ (profile / norm)


def _transitions(x: sp.spmatrix, alpha: float) -> sp.csr_matrix:
    p = normalize(sp.csr_matrix(x, dtype=np.float64), norm="l1", axis=1)
    p.data **= alpha
    return p


class P3Alpha(Recommender):
    """Three-step walk user -> item -> user -> item with transition probabilities raised to alpha.

    The item-to-item walk matrix is pruned to the top-N entries per row
    (self-transitions dropped) before the final user step.
    """

    def fit(self, train, catalog=None):
        super().fit(train, catalog)
        x = train.binary
        self.user_item = _transitions(x, self.config.alpha)
        item_user = _transitions(x.T, self.config.alpha)
        walk = (item_user @ self.user_item).tolil()
        walk.setdiag(0.0)
        self.weights = _top_n_per_row(self._penalise(sp.csr_matrix(walk)), self.config.neighbors)
        return self

    def _penalise(self, walk: sp.csr_matrix) -> sp.csr_matrix:
        return walk

    def raw_scores(self, learner_id: int) -> np.ndarray:
        if learner_id not in self.train._row:
            return np.zeros(0)
        r = self.train.row_of(learner_id)
        return np.asarray((self.user_item[r] @ self.weights).todense()).ravel()

    def score(self, learner_id: int, pool: int | None = None) -> ScoredCandidates:
        if learner_id not in self.train._row:
            # isolated node: the walk reaches nothing
            return ScoredCandidates(learner_id, np.empty(0, dtype=np.int64), np.empty(0))
        return super().score(learner_id, pool)


class RP3Beta(P3Alpha):
    """P3Alpha with each destination item divided by its popularity to the power beta."""

    def _penalise(self, walk):
        pop = self._popularity.astype(np.float64)
        scale = np.zeros_like(pop)
        seen = pop > 0
        scale[seen] = pop[seen] ** -self.config.beta
        return sp.csr_matrix(walk @ sp.diags(scale))


_CLASSES = {
    "Random": RandomRecommender,
    "TopPopular": TopPopular,
    "UserKNN": UserKNN,
    "ItemKNN": ItemKNN,
    "ItemKNN-CB": ItemKNNCB,
    "P3Alpha": P3Alpha,
    "RP3Beta": RP3Beta,
}


def make_recommender(config: ModelConfig | str) -> Recommender:
    if isinstance(config, str):
        config = ModelConfig.default(config)
    return _CLASSES[config.algorithm](config)


# -- one-shot helpers ---------------------------------------------------------


def _fit(algorithm: str, train, catalog=None, cfg: ModelConfig | None = None, **overrides) -> Recommender:
    if isinstance(train, Dataset):
        catalog = catalog or train
        train = build_feedback_matrix(train)
    cfg = cfg or ModelConfig.default(algorithm, **overrides)
    return make_recommender(cfg).fit(train, catalog)


def score_random(u: int, train, seed: int = 0) -> ScoredCandidates:
    return _fit("Random", train, seed=seed).score(u)


def score_top_popular(u: int, train) -> ScoredCandidates:
    return _fit("TopPopular", train).score(u)


def score_user_knn(u: int, train, cfg: ModelConfig | None = None) -> ScoredCandidates:
    return _fit("UserKNN", train, cfg=cfg).score(u)


def score_item_knn(u: int, train, cfg: ModelConfig | None = None) -> ScoredCandidates:
    return _fit("ItemKNN", train, cfg=cfg).score(u)


def score_item_knn_cb(u: int, train, catalog: Dataset, cfg: ModelConfig | None = None) -> ScoredCandidates:
    return _fit("ItemKNN-CB", train, catalog, cfg=cfg).score(u)


def score_p3alpha(u: int, train, cfg: ModelConfig | None = None) -> ScoredCandidates:
    return _fit("P3Alpha", train, cfg=cfg).score(u)


def score_rp3beta(u: int, train, cfg: ModelConfig | None = None) -> ScoredCandidates:
    return _fit("RP3Beta", train, cfg=cfg).score(u)


# -- score files --------------------------------------------------------------


def export_scores(scores: Mapping[int, ScoredCandidates], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCORE_COLUMNS)
        for u in sorted(scores):
            for cid, rel in scores[u].entries:
                w.writerow([u, cid, repr(float(rel))])


def load_external_scores(path: str | Path, train: FeedbackMatrix, catalog: Dataset | None = None) -> dict[int, ScoredCandidates]:
    """Read ``learner_id,course_id,relevance`` rows produced by any model.

    Scores are min-max renormalised per learner and training courses are
    dropped. Learners must appear in ``train``; courses in the catalog.
    """
    path = Path(path)
    known_courses = set(catalog.courses) if catalog is not None else set(train.courses.tolist())
    rows: dict[int, tuple[list[int], list[float]]] = {}
    bad_learners, bad_courses = set(), set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in SCORE_COLUMNS if c not in (reader.fieldnames or ())]
        if missing:
            raise RecommenderError(f"{path.name}: header is missing columns {missing}")
        for row in reader:
            try:
                u, i, rel = int(row["learner_id"]), int(row["course_id"]), float(row["relevance"])
            except (TypeError, ValueError):
                raise RecommenderError(f"{path.name} line {reader.line_num}: malformed row") from None
            if u not in train._row:
                bad_learners.add(u)
            if i not in known_courses:
                bad_courses.add(i)
            ids, vals = rows.setdefault(u, ([], []))
            ids.append(i)
            vals.append(rel)
    if bad_learners or bad_courses:
        raise RecommenderError(
            f"{path.name}: unknown learner ids {sorted(bad_learners)} / course ids {sorted(bad_courses)}"
        )
    return {
        u: ScoredCandidates.rank(u, ids, vals, exclude=train.items_of(u))
        for u, (ids, vals) in sorted(rows.items())
    }
