from driftml.search.space import (
    ConfigSpace,
    ComponentConfig,
    PipelineGenotype,
    build_pipeline,
    register_classifier_builder,
    register_preprocessor_builder,
)
from driftml.search.engine import (
    EvaluationResult,
    SearchBudget,
    SearchOutcome,
    evaluate_candidate,
    make_search,
    run_asha,
    run_async_ea,
    run_random_search,
)

__all__ = [
    "ComponentConfig",
    "ConfigSpace",
    "EvaluationResult",
    "PipelineGenotype",
    "SearchBudget",
    "SearchOutcome",
    "build_pipeline",
    "evaluate_candidate",
    "make_search",
    "register_classifier_builder",
    "register_preprocessor_builder",
    "run_asha",
    "run_async_ea",
    "run_random_search",
]
