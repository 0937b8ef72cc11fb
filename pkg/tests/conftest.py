from __future__ import annotations

import numpy as np
import pytest

from eduequity.catalog import (
    Course,
    GeneratorConfig,
    Interaction,
    build_feedback_matrix,
    fixed_timestamp_split,
    generate_synthetic,
    make_dataset,
)
from eduequity.principles import PrincipleContext


def course(cid, category="A", last_update=100, level="Beginner", assets=("Video",), enrolments=10, price=0.0, description=""):
    return Course(
        id=cid,
        category=category,
        last_update=last_update,
        level=level,
        asset_types=tuple(assets),
        enrolments=enrolments,
        price=price,
        description=description,
    )


def toy_dataset(matrix, **bounds):
    """Dataset whose binary interaction pattern is ``matrix`` (learners x courses).

    Entry values are used as ratings; zeros mean no interaction.
    """
    matrix = np.asarray(matrix, dtype=float)
    courses = [course(i, description=f"course {i}") for i in range(matrix.shape[1])]
    inter = [
        Interaction(u, i, float(matrix[u, i]), 100 + u)
        for u in range(matrix.shape[0])
        for i in range(matrix.shape[1])
        if matrix[u, i] > 0
    ]
    bounds.setdefault("platform_open", 0)
    bounds.setdefault("platform_now", 1000)
    return make_dataset(courses, inter, **bounds)


@pytest.fixture(scope="session")
def synthetic():
    return generate_synthetic(GeneratorConfig(n_learners=300, n_courses=120), seed=3)


@pytest.fixture(scope="session")
def synthetic_split(synthetic):
    t = int(np.percentile(synthetic.timestamps, 80))
    return fixed_timestamp_split(synthetic, t, min_train=4, min_test=1)


@pytest.fixture(scope="session")
def synthetic_train(synthetic_split):
    feedback = build_feedback_matrix(synthetic_split.train)
    return feedback, PrincipleContext.from_dataset(synthetic_split.train, feedback)


# -- acceptance report --------------------------------------------------------

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
