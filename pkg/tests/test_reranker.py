import itertools
import json

import numpy as np
import pytest

from eduequity.metrics import consistency
from eduequity.oracle import compare, instance_from_dict, load_instance, random_instance_dict
from eduequity.principles import PrincipleVector
from eduequity.recommenders import ScoredCandidates, make_recommender
from eduequity.reranker import (
    DEFAULT_LAMBDAS,
    SWEEP_COLUMNS,
    RerankConfig,
    RerankError,
    baseline_gaps,
    evaluate_lists,
    exhaustive_optimum,
    greedy_rerank,
    lambda_sweep,
    set_objective,
    strategy_weights,
    tradeoff,
    weights_glob,
    weights_pers,
    weights_user,
)

ONES = np.ones(7)


# -- weights ------------------------------------------------------------------


def test_weights_glob():
    assert weights_glob().tolist() == [1.0] * 7


def test_weights_user_divides_by_max_gap():
    assert weights_user([0.4, 0.2, 0, 0, 0, 0, 0]).tolist() == [1.0, 0.5, 0, 0, 0, 0, 0]
    assert weights_user([0.3] * 7).tolist() == [1.0] * 7
    assert weights_user([0.0] * 7).tolist() == [1.0] * 7
    with pytest.raises(RerankError, match="baseline"):
        weights_user(None)


def test_weights_pers():
    gaps = {1: np.array([0.5, 0, 0, 0, 0, 0, 0]), 2: np.zeros(7), 3: np.array([0, 0, 0.1, 0, 0, 0, 0.2])}
    assert weights_pers(1, gaps).tolist() == [1, 0, 0, 0, 0, 0, 0]
    assert weights_pers(2, gaps).tolist() == [1.0] * 7
    assert weights_pers(3, gaps).tolist() == [0, 0, 0.5, 0, 0, 0, 1]
    assert weights_pers(1, gaps).tolist() != weights_pers(3, gaps).tolist()
    with pytest.raises(RerankError):
        weights_pers(4, gaps)


def test_strategy_weights_two_learners():
    gaps = {1: np.array([0.4, 0.2, 0, 0, 0, 0, 0]), 2: np.array([0, 0.2, 0, 0, 0, 0, 0.4])}
    user = strategy_weights("User", [1, 2], gaps)
    # mean gaps (0.2, 0.2, 0, 0, 0, 0, 0.2)
    assert user[1].tolist() == user[2].tolist() == [1, 1, 0, 0, 0, 0, 1]
    pers = strategy_weights("Pers", [1, 2], gaps)
    assert pers[1].tolist() == [1, 0.5, 0, 0, 0, 0, 0]
    assert pers[2].tolist() == [0, 0.5, 0, 0, 0, 0, 1]
    with pytest.raises(RerankError):
        strategy_weights("User", [1, 2], None)


def test_config_validation():
    with pytest.raises(RerankError):
        RerankConfig(lam=1.5)
    with pytest.raises(RerankError):
        RerankConfig(k=20, candidate_pool=10)
    with pytest.raises(RerankError):
        RerankConfig(weight_strategy="Fair")
    with pytest.raises(RerankError):
        RerankConfig(targets={1: PrincipleVector.ones()}).target_for(2)


# -- greedy -------------------------------------------------------------------


def _instance(seed, **kw):
    return instance_from_dict(random_instance_dict(np.random.default_rng(seed), **kw))


def _run(inst, lam=None, k=None):
    cfg = inst.config
    if lam is not None or k is not None:
        cfg = RerankConfig(lam=cfg.lam if lam is None else lam, k=k or cfg.k, candidate_pool=cfg.candidate_pool)
    return greedy_rerank(inst.candidates, cfg, inst.weights, inst.targets, inst.context, inst.profile)


@pytest.mark.parametrize("seed", range(5))
def test_lambda_zero_keeps_baseline(seed):
    inst = _instance(seed, n=10, k=4)
    out = _run(inst, lam=0.0)
    assert out.reranked_topk == out.original_topk == inst.candidates.course_ids[:4].tolist()


def test_lambda_one_single_pick_maximises_consistency():
    inst = _instance(3, n=9, k=1)
    out = _run(inst, lam=1.0, k=1)
    ctx = inst.context
    best = max(
        inst.candidates.course_ids.tolist(),
        key=lambda i: consistency(ONES, ctx.table.evaluate([i], ctx.table.profile_distribution(inst.profile)), ONES),
    )
    assert out.reranked_topk == [best]


@pytest.mark.parametrize("seed", range(10))
def test_greedy_value_matches_reference_objective(seed):
    inst = _instance(seed, n=8, k=3, lam=0.5, random_targets=True)
    out = _run(inst)
    ref = set_objective(out.reranked_topk, inst.relevance, inst.context, inst.profile, inst.targets, inst.weights, 0.5, 3)
    assert out.objective_value == pytest.approx(ref, abs=1e-12)


def test_greedy_follows_stepwise_argmax():
    inst = _instance(11, n=8, k=4, lam=0.75)
    out = _run(inst)
    chosen = []
    rel = inst.relevance
    order = inst.candidates.course_ids.tolist()  # already in tie-break order
    for _ in range(4):
        rest = [i for i in order if i not in chosen]
        vals = [set_objective(chosen + [i], rel, inst.context, inst.profile, inst.targets, inst.weights, 0.75, 4) for i in rest]
        chosen.append(rest[int(np.argmax(vals))])
    assert out.reranked_topk == chosen


def test_ties_prefer_relevance_then_lower_id():
    inst = _instance(0, n=6, k=3)
    flat = ScoredCandidates(0, np.array([5, 2, 4, 1, 3, 0]), np.ones(6))
    cfg = RerankConfig(lam=0.0, k=3, candidate_pool=6)
    out = greedy_rerank(flat, cfg, ONES, PrincipleVector.ones(), inst.context, inst.profile)
    assert out.reranked_topk == [5, 2, 4]


def test_exhaustive_matches_manual_enumeration():
    inst = _instance(2, n=8, k=3)
    best, value = exhaustive_optimum(inst.candidates, inst.config, inst.weights, inst.targets, inst.context, inst.profile)
    rel = inst.relevance
    manual = max(
        set_objective(s, rel, inst.context, inst.profile, inst.targets, inst.weights, 0.5, 3)
        for s in itertools.combinations(inst.candidates.course_ids.tolist(), 3)
    )
    assert value == pytest.approx(manual)
    assert len(list(itertools.combinations(range(8), 3))) == 56


@pytest.mark.parametrize("seed", range(20))
def test_greedy_within_bound_on_small_instances(seed):
    report = compare(_instance(seed, n=8, k=3, lam=0.5))
    assert report.meets_bound


def test_oracle_ratio_one_for_trivial_instances():
    doc = random_instance_dict(np.random.default_rng(5), n=6, k=3, lam=0.0)
    assert compare(instance_from_dict(doc)).ratio == pytest.approx(1.0)
    doc = random_instance_dict(np.random.default_rng(5), n=4, k=4, lam=0.5)
    assert compare(instance_from_dict(doc)).ratio == pytest.approx(1.0)


def test_oracle_rejects_large_instances():
    doc = random_instance_dict(np.random.default_rng(0), n=13, k=3)
    with pytest.raises(RerankError, match="at most"):
        instance_from_dict(doc)


def test_bundled_instance_meets_bound():
    from importlib.resources import files

    inst = load_instance(files("eduequity") / "data" / "oracle_8.json")
    assert len(inst.candidates) == 8
    assert compare(inst).ratio >= 0.632


def test_instance_json_roundtrip(tmp_path):
    doc = random_instance_dict(np.random.default_rng(9))
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(doc))
    assert compare(load_instance(path)) == compare(instance_from_dict(doc))


def test_pool_smaller_than_k():
    inst = _instance(0, n=3, k=3)
    cfg = RerankConfig(lam=0.5, k=4, candidate_pool=10)
    with pytest.raises(RerankError, match="need at least"):
        greedy_rerank(inst.candidates, cfg, ONES, PrincipleVector.ones(), inst.context, inst.profile)


def test_marginal_gains_diminish_without_familiarity_and_learnability():
    # the five averaged principles and the relevance term are modular
    rng = np.random.default_rng(17)
    w = np.array([0, 1, 0, 1, 1, 1, 1.0])
    for _ in range(200):
        inst = _instance(int(rng.integers(1 << 30)), n=8, k=4, lam=float(rng.choice(DEFAULT_LAMBDAS)), random_targets=True)
        ids = inst.candidates.course_ids.tolist()
        b = [i for i in ids if rng.random() < 0.4][:3]
        a = [i for i in b if rng.random() < 0.5]
        x = next(i for i in ids if i not in b)

        def f(s):
            return set_objective(s, inst.relevance, inst.context, inst.profile, inst.targets, w, inst.config.lam, 4)

        assert f(a + [x]) - f(a) >= f(b + [x]) - f(b) - 1e-9


# -- sweeps -------------------------------------------------------------------


@pytest.fixture(scope="module")
def sweep_inputs(synthetic_split, synthetic_train):
    feedback, ctx = synthetic_train
    model = make_recommender("UserKNN").fit(feedback, synthetic_split.train)
    learners = synthetic_split.learners[:60]
    scores = {u: model.score(u, 50) for u in learners}
    return scores, ctx, feedback, synthetic_split.test


def test_zero_grid_equals_baseline(sweep_inputs):
    scores, ctx, feedback, test = sweep_inputs
    cfg = RerankConfig(k=10, candidate_pool=50)
    rows = lambda_sweep(scores, [0.0], cfg, ctx, feedback, test, "UserKNN", ["Glob"])
    base = {u: s.course_ids[:10].tolist() for u, s in scores.items()}
    acc, per_learner, per_principle = evaluate_lists(base, test, {u: ONES for u in base}, cfg, ctx, feedback)
    assert len(rows) == 1
    assert rows[0].ndcg == acc
    assert rows[0].consistency == pytest.approx(np.mean(list(per_learner.values())))
    assert rows[0].per_principle == tuple(per_principle)


def test_sweep_table_shape_and_consistency_trend(sweep_inputs):
    scores, ctx, feedback, test = sweep_inputs
    cfg = RerankConfig(k=10, candidate_pool=50)
    rows = lambda_sweep(scores, DEFAULT_LAMBDAS, cfg, ctx, feedback, test, "UserKNN")
    assert len(rows) == 15
    assert all(len(r.as_row()) == len(SWEEP_COLUMNS) for r in rows)
    for strategy in ("Glob", "User", "Pers"):
        series = [r.consistency for r in rows if r.strategy == strategy]
        assert len(series) == 5
        assert all(b >= a - 1e-9 for a, b in zip(series, series[1:]))
    gains = tradeoff(rows)
    assert len(gains) == 12
    assert all(g["consistency_gain"] >= -1e-9 for g in gains)


def test_sweep_is_deterministic(sweep_inputs):
    scores, ctx, feedback, test = sweep_inputs
    cfg = RerankConfig(k=10, candidate_pool=50)
    a = lambda_sweep(scores, [0.5], cfg, ctx, feedback, test, "UserKNN")
    b = lambda_sweep(scores, [0.5], cfg, ctx, feedback, test, "UserKNN")
    assert [r.as_row() for r in a] == [r.as_row() for r in b]


def test_empty_grid_rejected(sweep_inputs):
    scores, ctx, feedback, test = sweep_inputs
    with pytest.raises(RerankError):
        lambda_sweep(scores, [], RerankConfig(), ctx, feedback, test)


def test_baseline_gaps_are_shortfalls(sweep_inputs):
    scores, ctx, feedback, _ = sweep_inputs
    gaps = baseline_gaps(scores, RerankConfig(k=10, candidate_pool=50), ctx, feedback)
    for u, g in gaps.items():
        q = ctx.table.evaluate(scores[u].course_ids[:10], ctx.table.profile_distribution(feedback.items_of(u)))
        assert g == pytest.approx(1 - q)
