"""Consistency and equality of educational principles in course recommendations."""

from .catalog import (
    Course,
    Dataset,
    FeedbackMatrix,
    GeneratorConfig,
    Interaction,
    build_feedback_matrix,
    fixed_timestamp_split,
    generate_synthetic,
    load_catalog,
)
from .metrics import consistency, equality, ndcg, population_consistency, profile_consistency
from .principles import PRINCIPLES, PrincipleContext, PrincipleVector, evaluate_all, gini, hellinger
from .recommenders import ALGORITHMS, ModelConfig, ScoredCandidates, make_recommender
from .reranker import DEFAULT_LAMBDAS, RerankConfig, greedy_rerank, lambda_sweep

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "DEFAULT_LAMBDAS",
    "PRINCIPLES",
    "Course",
    "Dataset",
    "FeedbackMatrix",
    "GeneratorConfig",
    "Interaction",
    "ModelConfig",
    "PrincipleContext",
    "PrincipleVector",
    "RerankConfig",
    "ScoredCandidates",
    "build_feedback_matrix",
    "consistency",
    "equality",
    "evaluate_all",
    "fixed_timestamp_split",
    "generate_synthetic",
    "gini",
    "greedy_rerank",
    "hellinger",
    "lambda_sweep",
    "load_catalog",
    "make_recommender",
    "ndcg",
    "population_consistency",
    "profile_consistency",
]
