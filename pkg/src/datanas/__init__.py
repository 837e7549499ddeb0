"""Joint search over input data configurations and tiny model architectures.

The search space pairs an input data configuration (resolution, color
encoding) with a MobileNetV2-style architecture (per-stage block counts,
width multiplier). Candidates are scored by a fitness that combines
predictive metrics with normalized RAM and flash constraint penalties,
and explored by a steady-state genetic algorithm. Resource figures come
from a static layer-shape walk assuming one-sample streaming inference.
"""

from .arch_model import LayerGraph, LayerSpec, count_parameters, instantiate
from .evaluator import (
    Backend,
    BackendError,
    EvaluationError,
    ExternalBackend,
    PretrainError,
    SurrogateBackend,
    SurrogateParams,
    surrogate_evaluate,
)
from .evolution import (
    EvaluatedCandidate,
    SearchConfig,
    SearchHistory,
    crossover,
    cumulative_pareto_fraction,
    fitness_evolution,
    mutate,
    pareto_front,
    run_search,
    tournament_select,
)
from .fitness import (
    Constraints,
    EvalMetrics,
    FitnessWeights,
    fitness,
    violations,
)
from .resources import (
    DatatypeSize,
    ResourceEstimate,
    estimate,
    estimate_flash,
    estimate_ram,
)
from .search_space import (
    ALPHAS,
    COLORS,
    DEPTH_LIMITS,
    RESOLUTIONS,
    Candidate,
    DataConfig,
    ModelConfig,
    effective_width,
    enumerate_data_configs,
    random_candidate,
    repair_depths,
    validate,
)
from .supernet_cache import SupernetCache, SupernetState

__version__ = "0.1.0"

__all__ = [
    "ALPHAS",
    "COLORS",
    "DEPTH_LIMITS",
    "RESOLUTIONS",
    "Backend",
    "BackendError",
    "Candidate",
    "Constraints",
    "DataConfig",
    "DatatypeSize",
    "EvalMetrics",
    "EvaluatedCandidate",
    "EvaluationError",
    "ExternalBackend",
    "FitnessWeights",
    "LayerGraph",
    "LayerSpec",
    "ModelConfig",
    "PretrainError",
    "ResourceEstimate",
    "SearchConfig",
    "SearchHistory",
    "SupernetCache",
    "SupernetState",
    "SurrogateBackend",
    "SurrogateParams",
    "count_parameters",
    "crossover",
    "cumulative_pareto_fraction",
    "effective_width",
    "enumerate_data_configs",
    "estimate",
    "estimate_flash",
    "estimate_ram",
    "fitness",
    "fitness_evolution",
    "instantiate",
    "mutate",
    "pareto_front",
    "random_candidate",
    "repair_depths",
    "run_search",
    "surrogate_evaluate",
    "tournament_select",
    "validate",
    "violations",
]
