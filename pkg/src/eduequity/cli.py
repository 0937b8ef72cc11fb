"""Command-line driver: data -> split -> score -> re-rank -> evaluate -> report.

``eduequity run --config run.json`` writes the reports into ``--out``.
Every flag can also come from the environment: ``EDUEQ_CONFIG``,
``EDUEQ_SEED``, ``EDUEQ_OUT`` and ``EDUEQ_STAGES``. Flags win over the
environment, the environment wins over the config file.

Config document (all keys optional except the dataset)::

    {
      "seed": 7,
      "dataset": {"generator": {"n_learners": 500, ...}}
               | {"courses": "courses.csv", "interactions": "interactions.csv", "bounds": {...}},
      "split": {"timestamp": 1496880000 | "2017-06-08", "quantile": 0.8,
                "min_train": 4, "min_test": 1},
      "algorithms": ["UserKNN", {"algorithm": "P3Alpha", "alpha": 0.8}, ...],
      "external_scores": {"CoupledCF": "coupledcf_scores.csv"},
      "rerank": {"k": 10, "candidate_pool": 100, "lambdas": [0, 0.25, 0.5, 0.75, 0.99],
                 "strategies": ["Glob", "User", "Pers"], "targets": [1, 1, 1, 1, 1, 1, 1]},
      "sweep_algorithms": ["UserKNN"]
    }

Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from .catalog import (
    GeneratorConfig,
    build_feedback_matrix,
    fixed_timestamp_split,
    generate_synthetic,
    load_catalog,
    write_catalog,
)
from .metrics import equality, ndcg, population_consistency, profile_consistency
from .oracle import GREEDY_BOUND, compare, load_instance
from .principles import PRINCIPLES, PrincipleContext, PrincipleVector
from .recommenders import ALGORITHMS, ModelConfig, load_external_scores, make_recommender
from .reranker import DEFAULT_LAMBDAS, STRATEGIES, SWEEP_COLUMNS, RerankConfig, evaluate_lists, lambda_sweep, tradeoff

log = logging.getLogger("eduequity")

ENV_PREFIX = "EDUEQ_"
STAGES = ("data", "baseline", "sweep")
DEFAULT_STAGES = ("baseline", "sweep")

SUMMARY_COLUMNS = ("algorithm", "ndcg", "consistency", "equality")
PER_LEARNER_COLUMNS = ("algorithm", "learner_id", "ndcg", "consistency", "profile_consistency")
PRINCIPLE_COLUMNS = ("algorithm",) + tuple(f"c_{p}" for p in PRINCIPLES)
TRADEOFF_COLUMNS = ("lambda", "strategy", "algorithm", "ndcg_loss", "consistency_gain", "equality_gain")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    dataset: dict
    seed: int = 0
    split: dict = field(default_factory=dict)
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    external_scores: dict = field(default_factory=dict)
    rerank: dict = field(default_factory=dict)
    sweep_algorithms: list | None = None
    base_dir: Path = Path(".")

    @classmethod
    def load(cls, path: str | Path) -> PipelineConfig:
        path = Path(path)
        doc = json.loads(path.read_text(encoding="utf-8"))
        known = {"dataset", "seed", "split", "algorithms", "external_scores", "rerank", "sweep_algorithms"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        if "dataset" not in doc:
            raise ValueError("config needs a 'dataset' section")
        return cls(**doc, base_dir=path.resolve().parent)

    def path(self, p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def model_configs(self) -> list[ModelConfig]:
        out = []
        for entry in self.algorithms:
            if isinstance(entry, str):
                entry = {"algorithm": entry}
            entry = dict(entry)
            name = entry.pop("algorithm")
            entry.setdefault("seed", self.seed)
            out.append(ModelConfig.default(name, **entry))
        return out

    def rerank_config(self) -> RerankConfig:
        r = self.rerank
        targets = PrincipleVector.of(r["targets"]) if "targets" in r else PrincipleVector.ones()
        return RerankConfig(
            lam=0.0,
            k=int(r.get("k", 10)),
            candidate_pool=int(r.get("candidate_pool", 100)),
            targets=targets,
        )


def _timestamp(value) -> int:
    if isinstance(value, (int, float)):
        return int(value)
    d = date.fromisoformat(str(value))
    return int(datetime(d.year, d.month, d.day, tzinfo=timezone.utc).timestamp())


def _fmt(x: float, places: int) -> str:
    return f"{x:.{places}f}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


class Pipeline:
    def __init__(self, cfg: PipelineConfig, out: Path, stages) -> None:
        self.cfg = cfg
        self.out = out
        self.stages = tuple(stages)

    def _stage(self, name, fn, *args):
        log.info("stage %s", name)
        try:
            return fn(*args)
        except StageError:
            raise
        except (ValueError, KeyError, OSError) as exc:
            raise StageError(name, str(exc)) from exc

    def run(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        data = self._stage("data", self.load_data)
        if "data" in self.stages:
            self._stage("data", write_catalog, data, self.out / "courses.csv", self.out / "interactions.csv")
        split = self._stage("split", self.split, data)
        feedback = build_feedback_matrix(split.train)
        ctx = PrincipleContext.from_dataset(split.train, feedback)
        rerank = self._stage("rerank", self.cfg.rerank_config)
        if not {"baseline", "sweep"} & set(self.stages):
            return
        scores = self._stage("score", self.score, split, feedback)
        if "baseline" in self.stages:
            self._stage("evaluate", self.baseline, scores, split, feedback, ctx, rerank)
        if "sweep" in self.stages:
            self._stage("sweep", self.sweep, scores, split, feedback, ctx, rerank)

    def load_data(self):
        src = self.cfg.dataset
        if "generator" in src:
            return generate_synthetic(GeneratorConfig.from_dict(src["generator"]), seed=self.cfg.seed)
        if "courses" in src and "interactions" in src:
            bounds = src.get("bounds")
            if isinstance(bounds, str):
                bounds = self.cfg.path(bounds)
            return load_catalog(self.cfg.path(src["courses"]), self.cfg.path(src["interactions"]), bounds)
        raise ValueError("dataset needs either 'generator' or 'courses' and 'interactions'")

    def split(self, data):
        s = self.cfg.split
        if "timestamp" in s:
            t = _timestamp(s["timestamp"])
        else:
            t = int(np.quantile(data.timestamps, float(s.get("quantile", 0.8)), method="lower"))
        out = fixed_timestamp_split(data, t, int(s.get("min_train", 4)), int(s.get("min_test", 1)))
        log.info(
            "split at %d: %d learners, %d courses, %d interactions",
            t, out.n_learners, out.n_courses, out.n_interactions,
        )
        return out

    def score(self, split, feedback):
        pool = int(self.cfg.rerank.get("candidate_pool", 100))
        scores = {}
        for mc in self.cfg.model_configs():
            log.info("scoring %s", mc.algorithm)
            model = make_recommender(mc).fit(feedback, split.train)
            scores[mc.algorithm] = {u: model.score(u, pool) for u in split.learners}
        for name, path in sorted(self.cfg.external_scores.items()):
            loaded = load_external_scores(self.cfg.path(path), feedback, split.train)
            missing = [u for u in split.learners if u not in loaded]
            if missing:
                raise ValueError(f"{name}: no scores for learners {missing[:5]}")
            scores[name] = {u: loaded[u].top(pool) for u in split.learners}
        return scores

    def baseline(self, scores, split, feedback, ctx, rerank) -> None:
        ones = np.ones(len(PRINCIPLES))
        summary, per_learner_rows, principle_rows = [], [], []
        profile = {
            u: profile_consistency(u, feedback, rerank.target_for(u), ones, ctx) for u in split.learners
        }
        for name, by_learner in scores.items():
            lists = {u: c.course_ids[: rerank.k].tolist() for u, c in by_learner.items()}
            weights = {u: ones for u in lists}
            acc, per_learner, per_principle = evaluate_lists(lists, split.test, weights, rerank, ctx, feedback)
            summary.append(
                [name, _fmt(acc, 3), _fmt(population_consistency(per_learner), 3), _fmt(equality(per_learner), 3)]
            )
            for u in sorted(lists):
                per_learner_rows.append(
                    [
                        name,
                        u,
                        _fmt(ndcg(lists[u], split.test[u], rerank.k), 6),
                        _fmt(per_learner[u], 6),
                        _fmt(profile[u], 6),
                    ]
                )
            principle_rows.append([name, *(_fmt(v, 6) for v in per_principle)])
        _write_csv(self.out / "summary.csv", SUMMARY_COLUMNS, summary)
        _write_csv(self.out / "per_learner.csv", PER_LEARNER_COLUMNS, per_learner_rows)
        _write_csv(self.out / "principles.csv", PRINCIPLE_COLUMNS, principle_rows)

    def sweep(self, scores, split, feedback, ctx, rerank) -> None:
        r = self.cfg.rerank
        grid = [float(v) for v in r.get("lambdas", DEFAULT_LAMBDAS)]
        strategies = list(r.get("strategies", STRATEGIES))
        names = self.cfg.sweep_algorithms if self.cfg.sweep_algorithms is not None else list(scores)
        rows = []
        for name in names:
            if name not in scores:
                raise ValueError(f"sweep algorithm {name!r} was not scored")
            log.info("sweeping %s", name)
            rows += lambda_sweep(scores[name], grid, rerank, ctx, feedback, split.test, name, strategies)
        _write_csv(
            self.out / "sweep.csv",
            SWEEP_COLUMNS,
            [[*row[:3], *(_fmt(v, 6) for v in row[3:])] for row in (r.as_row() for r in rows)],
        )
        _write_csv(
            self.out / "tradeoff.csv",
            TRADEOFF_COLUMNS,
            [[g["lambda"], g["strategy"], g["algorithm"], *(_fmt(g[c], 6) for c in TRADEOFF_COLUMNS[3:])] for g in tradeoff(rows)],
        )


# -- entry points -------------------------------------------------------------


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def cmd_run(args) -> int:
    config = args.config or _env("CONFIG")
    if not config:
        raise StageError("config", "no config given (--config or EDUEQ_CONFIG)")
    try:
        cfg = PipelineConfig.load(config)
    except (OSError, ValueError, TypeError) as exc:
        raise StageError("config", str(exc)) from exc
    seed = args.seed if args.seed is not None else _env("SEED")
    if seed is not None:
        cfg.seed = int(seed)
    out = Path(args.out or _env("OUT") or "reports")
    stages = args.stages or _env("STAGES") or ",".join(DEFAULT_STAGES)
    stages = [s.strip() for s in stages.split(",") if s.strip()]
    bad = [s for s in stages if s not in STAGES]
    if bad:
        raise StageError("config", f"unknown stages {bad}; choose from {STAGES}")
    Pipeline(cfg, out, stages).run()
    print(f"reports written to {out}")
    return 0


def cmd_oracle(args) -> int:
    try:
        report = compare(load_instance(args.instance))
    except (OSError, ValueError, KeyError) as exc:
        raise StageError("oracle", str(exc)) from exc
    print(f"greedy   {report.greedy} objective={report.greedy_value:.6f}")
    print(f"optimum  {report.optimum} objective={report.optimum_value:.6f}")
    print(f"ratio    {report.ratio:.6f} (bound {GREEDY_BOUND:.6f}: {'met' if report.meets_bound else 'VIOLATED'})")
    return 0 if report.meets_bound else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eduequity", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the evaluation pipeline")
    run.add_argument("--config", help="pipeline config JSON (env EDUEQ_CONFIG)")
    run.add_argument("--seed", type=int, help="root seed, overrides the config (env EDUEQ_SEED)")
    run.add_argument("--out", help="report directory (env EDUEQ_OUT, default ./reports)")
    run.add_argument(
        "--stages",
        help=f"comma list from {','.join(STAGES)} (env EDUEQ_STAGES, default {','.join(DEFAULT_STAGES)})",
    )
    run.set_defaults(func=cmd_run)

    oracle = sub.add_parser("oracle", help="compare greedy re-ranking with the exhaustive optimum")
    oracle.add_argument("--instance", required=True, help="instance JSON with at most 12 candidates")
    oracle.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"eduequity: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
