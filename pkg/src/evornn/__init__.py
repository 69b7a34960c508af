"""evornn: training-free evaluation and evolutionary search of recurrent networks.

Architectures are scored without any gradient training: draw random weight
sets, fit a truncated normal to the observed MAE distribution, and rank by
the log-probability of beating an error threshold.  A genetic algorithm
searches architecture space on that signal, and a (mu+lambda) evolution
strategy optimizes weights directly when a trained network is wanted.
"""

__version__ = "0.1.0"

from .core import (
    Architecture,
    Problem,
    SearchSpace,
    Solution,
    solution_fitness,
    validate_architecture,
)
from .data import (
    TimeSeriesDataset,
    WindowedDataset,
    generate_sine,
    load_series,
    split_series,
    window,
)
from .network import (
    LayerWeights,
    WeightSet,
    flatten_weights,
    lstm_cell_step,
    mae,
    param_count,
    predict,
    weights_from_flat,
    zero_weights,
)
from .sampling import (
    DegenerateSamplesError,
    MaeSamplingProblem,
    MaeSamplingStats,
    derive_seed,
    fit_truncated_normal,
    mae_random_sampling,
    sample_weights,
    spawn_rng,
    truncated_tail_log_prob,
)
from .evolution import (
    EvolutionConfig,
    GenerationRecord,
    Individual,
    cut_splice_crossover,
    evolve_architecture,
    evolve_weights,
    mutate,
    random_individual,
    tournament_select,
)
from .cli import (
    Action,
    ConfigError,
    RunConfig,
    export_model_config,
    register_action,
    registered_actions,
    run,
)

__all__ = [
    "__version__",
    "Architecture", "Problem", "SearchSpace", "Solution",
    "solution_fitness", "validate_architecture",
    "TimeSeriesDataset", "WindowedDataset",
    "generate_sine", "load_series", "split_series", "window",
    "LayerWeights", "WeightSet",
    "flatten_weights", "lstm_cell_step", "mae", "param_count", "predict",
    "weights_from_flat", "zero_weights",
    "DegenerateSamplesError", "MaeSamplingProblem", "MaeSamplingStats",
    "derive_seed", "fit_truncated_normal", "mae_random_sampling",
    "sample_weights", "spawn_rng", "truncated_tail_log_prob",
    "EvolutionConfig", "GenerationRecord", "Individual",
    "cut_splice_crossover", "evolve_architecture", "evolve_weights",
    "mutate", "random_individual", "tournament_select",
    "Action", "ConfigError", "RunConfig",
    "export_model_config", "register_action", "registered_actions", "run",
]
