import csv
import hashlib

import numpy as np
import pytest
from scipy import stats

from eduequity.catalog import (
    CatalogError,
    GeneratorConfig,
    Interaction,
    build_feedback_matrix,
    fixed_timestamp_split,
    generate_synthetic,
    load_catalog,
    make_dataset,
    write_catalog,
)

from .conftest import course


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


COURSE_HEADER = ["id", "category", "last_update", "level", "asset_types", "enrolments", "price", "description"]
INTER_HEADER = ["learner_id", "course_id", "rating", "timestamp"]


@pytest.fixture
def small_files(tmp_path):
    _write(
        tmp_path / "courses.csv",
        COURSE_HEADER,
        [
            [1, "Development", 100, "Beginner", "Video|Article", 50, 0.0, "learn python, fast"],
            [2, "Design", 200, "Expert", "Video", 10, 19.99, "color theory"],
            [3, "Music", 300, "All Levels", "Podcast|Ebook|Video", 5, 120.5, "piano"],
        ],
    )
    _write(
        tmp_path / "interactions.csv",
        INTER_HEADER,
        [[10, 1, 4.5, 150], [10, 2, 3.0, 250], [11, 1, 5.0, 160], [12, 3, 2.5, 310], [11, 3, 4.0, 320]],
    )
    return tmp_path / "courses.csv", tmp_path / "interactions.csv"


def test_load_small_catalog(small_files):
    d = load_catalog(*small_files)
    assert len(d.courses) == 3
    assert len(d) == 5
    assert d.learners.tolist() == [10, 11, 12]
    assert d.courses[1].asset_types == ("Video", "Article")
    assert d.courses[1].description == "learn python, fast"
    assert d.rating_bounds == (2.5, 5.0)
    assert d.price_bounds == (0.0, 120.5)
    assert d.enrolment_bounds == (5, 50)
    assert d.platform_open == 100 and d.platform_now == 320


def test_bounds_override_from_json(small_files, tmp_path):
    cfg = tmp_path / "bounds.json"
    cfg.write_text('{"rating_min": 0.5, "rating_max": 5, "price_max": 500, "platform_now": 1000}')
    d = load_catalog(*small_files, bounds=cfg)
    assert d.rating_bounds == (0.5, 5.0)
    assert d.price_bounds == (0.0, 500.0)
    assert d.platform_now == 1000


def test_dangling_course_reference(small_files):
    courses, inter = small_files
    with open(inter, "a", encoding="utf-8") as fh:
        fh.write("13,999,4.0,200\n")
    with pytest.raises(CatalogError, match="999"):
        load_catalog(courses, inter)


def test_malformed_row_names_line_and_field(small_files):
    courses, inter = small_files
    with open(inter, "a", encoding="utf-8") as fh:
        fh.write("13,1,abc,200\n")
    with pytest.raises(CatalogError, match=r"line 7.*'rating'"):
        load_catalog(courses, inter)


def test_missing_header_column(tmp_path, small_files):
    courses, _ = small_files
    _write(tmp_path / "bad.csv", ["learner_id", "course_id", "rating"], [[1, 1, 3.0]])
    with pytest.raises(CatalogError, match="timestamp"):
        load_catalog(courses, tmp_path / "bad.csv")


def test_course_invariants():
    with pytest.raises(CatalogError, match="taxonomy"):
        make_dataset([course(1, category="X")], [], taxonomy=["A"], platform_open=0, platform_now=1000)
    with pytest.raises(CatalogError, match="asset"):
        make_dataset([course(1, assets=("Hologram",))], [], platform_open=0, platform_now=1000)
    with pytest.raises(CatalogError, match="platform"):
        make_dataset([course(1)], [], platform_open=10, platform_now=10)


def test_write_then_load_roundtrip(small_files, tmp_path):
    d = load_catalog(*small_files)
    write_catalog(d, tmp_path / "c2.csv", tmp_path / "i2.csv")
    again = load_catalog(tmp_path / "c2.csv", tmp_path / "i2.csv")
    assert again.courses == d.courses
    assert list(again.interactions) == list(d.interactions)


# -- feedback matrix ----------------------------------------------------------


def test_single_interaction_matrix():
    d = make_dataset([course(0)], [Interaction(0, 0, 4.5, 100)], platform_open=0, platform_now=1000)
    r = build_feedback_matrix(d)
    assert r.nnz == 1
    assert r.ratings[0, 0] == 4.5


def test_duplicates_keep_latest():
    inter = [Interaction(0, 0, 2.0, 300), Interaction(0, 0, 5.0, 100), Interaction(0, 1, 1.0, 50)]
    d = make_dataset([course(0), course(1)], inter, platform_open=0, platform_now=1000)
    r = build_feedback_matrix(d)
    assert r.nnz == 2
    assert r.ratings[0, 0] == 2.0
    assert r.items_of(0).tolist() == [0, 1]
    assert r.users_of(1).tolist() == [0]


def test_synthetic_matrix_nonzeros():
    cfg = GeneratorConfig(n_learners=500, n_courses=200, density=0.02)
    d = generate_synthetic(cfg, seed=11)
    r = build_feedback_matrix(d)
    # oracle: direct count of distinct (learner, course) pairs
    direct = len(set(zip(d.learner_ids.tolist(), d.course_ids.tolist())))
    assert r.nnz == direct
    assert abs(r.nnz - 2000) <= 3 * np.sqrt(2000)


# -- generator ----------------------------------------------------------------


def test_generator_is_deterministic(tmp_path):
    cfg = GeneratorConfig(n_learners=500, n_courses=200)
    digests = []
    for run in range(2):
        d = generate_synthetic(cfg, seed=7)
        write_catalog(d, tmp_path / f"c{run}.csv", tmp_path / f"i{run}.csv")
        digests.append(
            hashlib.sha256((tmp_path / f"c{run}.csv").read_bytes() + (tmp_path / f"i{run}.csv").read_bytes()).hexdigest()
        )
    assert digests[0] == digests[1]
    assert generate_synthetic(cfg, seed=8).ratings.tolist() != generate_synthetic(cfg, seed=7).ratings.tolist()


def test_generator_categories_in_taxonomy():
    d = generate_synthetic(GeneratorConfig(n_learners=50, n_courses=80, n_categories=10), seed=1)
    assert len(d.taxonomy) == 10
    assert all(c.category in d.taxonomy for c in d.courses.values())


def test_zero_skew_gives_uniform_popularity():
    cfg = GeneratorConfig(n_learners=2000, n_courses=100, density=0.1, popularity_skew=0.0, category_affinity=0.0)
    d = generate_synthetic(cfg, seed=5)
    counts = np.bincount(d.course_ids, minlength=100)
    chi2, _ = stats.chisquare(counts)
    df = len(counts) - 1
    assert abs(chi2 - df) <= 3 * np.sqrt(2 * df)


def test_generator_rejects_sparse_density():
    with pytest.raises(CatalogError, match="minimum"):
        generate_synthetic(GeneratorConfig(n_courses=100, density=0.01, min_interactions=4))


def test_generator_config_from_dict():
    cfg = GeneratorConfig.from_dict({"n_learners": 10, "levels": ["a", "b"]})
    assert cfg.levels == ("a", "b")
    with pytest.raises(CatalogError):
        GeneratorConfig.from_dict({"n_users": 10})


# -- split --------------------------------------------------------------------


def test_split_minima_hold_by_recount(synthetic, synthetic_split):
    s = synthetic_split
    t = s.split_timestamp
    # oracle: an independent pass over the raw triples
    train, test = {}, {}
    for x in synthetic.interactions:
        (train if x.timestamp < t else test).setdefault(x.learner_id, set()).add(x.course_id)
    for u in s.learners:
        assert len(train[u]) >= 4
        assert len(test[u] - train[u]) >= 1
        assert s.test[u] == frozenset(test[u] - train[u])
    expected = {u for u in test if len(train.get(u, ())) >= 4 and test[u] - train.get(u, set())}
    assert set(s.learners) == expected
    assert s.n_learners == len(expected)


def test_split_partitions_by_timestamp(synthetic, synthetic_split):
    s = synthetic_split
    assert (s.train.timestamps < s.split_timestamp).all()
    n_after = int((synthetic.timestamps >= s.split_timestamp).sum())
    assert len(s.train) + n_after == len(synthetic)


def test_split_without_test_data_errors(synthetic):
    with pytest.raises(CatalogError, match="no evaluable"):
        fixed_timestamp_split(synthetic, synthetic.platform_now, min_train=10_000, min_test=1)


def test_split_rejects_bad_arguments(synthetic):
    with pytest.raises(CatalogError):
        fixed_timestamp_split(synthetic, synthetic.platform_open - 1)
    with pytest.raises(CatalogError):
        fixed_timestamp_split(synthetic, synthetic.platform_now, min_train=0)
