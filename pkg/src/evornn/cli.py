"""Config-driven command line tool.

One entry point, a registry of actions, JSON configs in, JSON result
documents out.  New actions plug in by subclassing :class:`Action` and
calling :func:`register_action`; the built-ins cover MAE random sampling of a
fixed architecture and evolutionary architecture optimization.

Result documents go to ``output_path`` or stdout; all logging goes to stderr,
so stdout stays machine-parseable.  Exit codes: 0 success, 1 config or
validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import Sequence

from . import __version__
from .core import Architecture, SearchSpace, Solution, validate_architecture
from .data import TimeSeriesDataset, generate_sine, load_series, split_series, window
from .evolution import EvolutionConfig, evolve_architecture
from .sampling import MaeSamplingProblem, derive_seed, mae_random_sampling

logger = logging.getLogger(__name__)

# noise stream tag, clear of the per-sample indices (seed, 0..n_samples-1)
_NOISE_KEY = 1 << 32

_EVOLUTION_KNOBS = (
    "population_size", "offspring_per_generation", "max_evaluations",
    "tournament_size", "elitism_count", "p_resize_layer", "p_add_layer",
    "p_remove_layer", "neuron_mutation_sigma", "look_back_step",
    "crossover_enabled", "samples_per_evaluation", "threshold",
)

_SPACE_KEYS = (
    "min_hidden_layers", "max_hidden_layers", "min_neurons", "max_neurons",
    "min_look_back", "max_look_back",
)

_DEFAULT_SPACE = {
    "min_hidden_layers": 1, "max_hidden_layers": 6,
    "min_neurons": 1, "max_neurons": 16,
    "min_look_back": 1, "max_look_back": 30,
}


class ConfigError(ValueError):
    """A run configuration that cannot be executed as given."""


@dataclass(frozen=True)
class DataConfig:
    """Where the series comes from: a sine generator or a delimited-text file."""

    kind: str
    n: int = 1000
    period: float = 100.0
    amplitude: float = 1.0
    phase: float = 0.0
    noise_std: float = 0.0
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated contents of one config document."""

    action: str
    seed: int
    workers: int
    output_path: str | None
    train_fraction: float | None
    data: DataConfig
    # sampling action
    architecture: tuple[int, ...] | None = None
    look_back: int | None = None
    n_samples: int = 100
    threshold: float = 0.01
    space_bounds: dict | None = None
    # optimization action
    evolution: dict | None = None


def _reject_unknown(block: dict, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}; allowed: {sorted(allowed)}")


def _parse_data(block) -> DataConfig:
    if not isinstance(block, dict):
        raise ConfigError('"data" must be an object')
    kind = block.get("type")
    if kind == "sine":
        _reject_unknown(block, ("type", "n", "period", "amplitude", "phase", "noise_std"), '"data"')
        return DataConfig(
            kind="sine",
            n=int(block.get("n", 1000)),
            period=float(block.get("period", 100.0)),
            amplitude=float(block.get("amplitude", 1.0)),
            phase=float(block.get("phase", 0.0)),
            noise_std=float(block.get("noise_std", 0.0)),
        )
    if kind == "csv":
        _reject_unknown(block, ("type", "path"), '"data"')
        if "path" not in block:
            raise ConfigError('csv data needs a "path"')
        return DataConfig(kind="csv", path=str(block["path"]))
    raise ConfigError(f'"data.type" must be "sine" or "csv", got {kind!r}')


def _parse_space(block, where: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    _reject_unknown(block, _SPACE_KEYS, where)
    bounds = dict(_DEFAULT_SPACE)
    bounds.update({key: int(value) for key, value in block.items()})
    return bounds


def parse_run_config(doc) -> RunConfig:
    """Validate a loaded config document into a RunConfig; raises ConfigError."""
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    top_keys = (
        "action", "seed", "workers", "output_path", "train_fraction", "data",
        "architecture", "look_back", "sampling", "space", "evolution",
    )
    _reject_unknown(doc, top_keys, "config root")
    if "action" not in doc:
        raise ConfigError('config is missing the "action" key')
    if "data" not in doc:
        raise ConfigError('config is missing the "data" block')

    seed = int(doc.get("seed", 0))
    if seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {seed}")
    workers = doc.get("workers")
    if workers is None:
        workers = os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    train_fraction = doc.get("train_fraction", 0.7)
    if train_fraction is not None:
        train_fraction = float(train_fraction)
        if not 0.0 < train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1) or null, got {train_fraction}")

    architecture = None
    look_back = None
    if "architecture" in doc:
        raw = doc["architecture"]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError('"architecture" must be a nonempty array of layer sizes')
        architecture = tuple(int(v) for v in raw)
    if "look_back" in doc:
        look_back = int(doc["look_back"])

    sampling_block = doc.get("sampling", {})
    if not isinstance(sampling_block, dict):
        raise ConfigError('"sampling" must be an object')
    _reject_unknown(sampling_block, ("n_samples", "threshold"), '"sampling"')
    n_samples = int(sampling_block.get("n_samples", 100))
    threshold = float(sampling_block.get("threshold", 0.01))

    space_bounds = _parse_space(doc["space"], '"space"') if "space" in doc else None

    evolution = None
    if "evolution" in doc:
        block = doc["evolution"]
        if not isinstance(block, dict):
            raise ConfigError('"evolution" must be an object')
        _reject_unknown(block, (*_EVOLUTION_KNOBS, "space"), '"evolution"')
        evolution = {key: block[key] for key in _EVOLUTION_KNOBS if key in block}
        evolution["space"] = _parse_space(block.get("space", {}), '"evolution.space"')

    return RunConfig(
        action=str(doc["action"]),
        seed=seed,
        workers=workers,
        output_path=doc.get("output_path"),
        train_fraction=train_fraction,
        data=_parse_data(doc["data"]),
        architecture=architecture,
        look_back=look_back,
        n_samples=n_samples,
        threshold=threshold,
        space_bounds=space_bounds,
        evolution=evolution,
    )


def _build_series(cfg: RunConfig) -> TimeSeriesDataset:
    """Produce the training series for a run; failures here are config errors."""
    try:
        if cfg.data.kind == "sine":
            series = generate_sine(
                cfg.data.n, cfg.data.period, cfg.data.amplitude, cfg.data.phase,
                cfg.data.noise_std, seed=derive_seed(cfg.seed, _NOISE_KEY),
            )
        else:
            series = load_series(cfg.data.path)
        if cfg.train_fraction is None:
            return series
        train, _ = split_series(series, cfg.train_fraction)
        return train
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------

class Action(ABC):
    """One executable behind the "action" config key.

    Extensions subclass this, set ``name``, and call :func:`register_action`.
    ``execute`` returns the result document; it raises ConfigError for
    anything that makes the run invalid before real work starts.
    """

    name: str = ""

    @abstractmethod
    def execute(self, cfg: RunConfig) -> dict:
        """Run the action and return a JSON-serializable result document."""


_REGISTRY: dict[str, Action] = {}


def register_action(action: Action) -> None:
    """Add an action to the registry; names must be unique and nonempty."""
    if not action.name:
        raise ValueError("action must define a nonempty name")
    if action.name in _REGISTRY:
        raise ValueError(f"action {action.name!r} is already registered")
    _REGISTRY[action.name] = action


def registered_actions() -> list[str]:
    return sorted(_REGISTRY)


class MaeRandomSamplingAction(Action):
    """MAE random sampling of one fixed architecture."""

    name = "mae-random-sampling"

    def execute(self, cfg: RunConfig) -> dict:
        if cfg.architecture is None or cfg.look_back is None:
            raise ConfigError('mae-random-sampling needs "architecture" and "look_back"')
        series = _build_series(cfg)
        try:
            arch = Architecture(cfg.architecture, cfg.look_back)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if arch.input_dim != series.num_features or arch.output_dim != series.num_features:
            raise ConfigError(
                f"architecture expects {arch.input_dim} -> {arch.output_dim} features, "
                f"series has {series.num_features}"
            )
        if cfg.space_bounds is not None:
            space = SearchSpace(
                **cfg.space_bounds,
                input_dim=series.num_features, output_dim=series.num_features,
            )
            violations = validate_architecture(arch, space)
            if violations:
                raise ConfigError("architecture outside search space: " + "; ".join(violations))
        try:
            windows = window(series, arch.look_back)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

        logger.info(
            "sampling %d random weight sets for architecture %s (look_back %d)",
            cfg.n_samples, list(arch.layer_sizes), arch.look_back,
        )
        stats = mae_random_sampling(
            arch, windows, cfg.n_samples, cfg.threshold, cfg.seed, workers=cfg.workers
        )
        for index, value in enumerate(stats.samples):
            logger.info("sample %d/%d: mae=%.6f", index + 1, cfg.n_samples, value)
        logger.info("log_p=%.6f p=%.6e mean=%.6f std=%.6f",
                    stats.log_p, stats.p, stats.mean, stats.std)
        return {
            "look_back": arch.look_back,
            "architecture": list(arch.layer_sizes),
            "metrics": {
                "log_p": stats.log_p,
                "p": stats.p,
                "mean": stats.mean,
                "samples": list(stats.samples),
                "std": stats.std,
            },
            "run": {
                "action": self.name,
                "seed": cfg.seed,
                "n_samples": cfg.n_samples,
                "threshold": cfg.threshold,
                "version": __version__,
            },
        }


class ArchitectureOptimizationAction(Action):
    """Evolutionary search for the architecture with the best log_p."""

    name = "architecture-optimization"

    def execute(self, cfg: RunConfig) -> dict:
        series = _build_series(cfg)
        knobs = dict(cfg.evolution or {})
        bounds = knobs.pop("space", dict(_DEFAULT_SPACE))
        try:
            space = SearchSpace(
                **bounds, input_dim=series.num_features, output_dim=series.num_features
            )
            evo_cfg = EvolutionConfig(
                space=space, seed=cfg.seed, workers=cfg.workers, **knobs
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

        problem = MaeSamplingProblem(
            series,
            n_samples=evo_cfg.samples_per_evaluation,
            threshold=evo_cfg.threshold,
            seed=cfg.seed,
            workers=1,  # parallelism lives at the genome level here
        )

        def evaluator(arch: Architecture) -> float:
            return problem.evaluate(arch)["log_p"]

        best, history = evolve_architecture(evaluator, evo_cfg)
        return {
            "fitness": {"log_p": best.metrics["log_p"]},
            "layers": list(best.architecture.layer_sizes),
            "look_back": best.architecture.look_back,
            "config": export_model_config(best),
            "history": [asdict(record) for record in history],
            "run": {
                "action": self.name,
                "seed": cfg.seed,
                "parameters": {
                    "population_size": evo_cfg.population_size,
                    "offspring_per_generation": evo_cfg.offspring_per_generation,
                    "max_evaluations": evo_cfg.max_evaluations,
                    "tournament_size": evo_cfg.tournament_size,
                    "elitism_count": evo_cfg.elitism_count,
                    "p_resize_layer": evo_cfg.p_resize_layer,
                    "p_add_layer": evo_cfg.p_add_layer,
                    "p_remove_layer": evo_cfg.p_remove_layer,
                    "neuron_mutation_sigma": evo_cfg.neuron_mutation_sigma,
                    "look_back_step": evo_cfg.look_back_step,
                    "crossover_enabled": evo_cfg.crossover_enabled,
                    "samples_per_evaluation": evo_cfg.samples_per_evaluation,
                    "threshold": evo_cfg.threshold,
                    "space": bounds,
                },
                "version": __version__,
            },
        }


def export_model_config(solution: Solution) -> list[dict]:
    """Layer-config records a downstream deep-learning stack can rebuild from.

    One LSTM record per hidden layer (all but the last return sequences so the
    stack chains), then the linear Dense head.
    """
    arch = solution.architecture
    hidden = arch.hidden_sizes
    records = []
    for position, units in enumerate(hidden):
        records.append({
            "class_name": "LSTM",
            "config": {
                "activation": arch.hidden_activation,
                "return_sequences": position < len(hidden) - 1,
                "units": units,
            },
        })
    records.append({
        "class_name": "Dense",
        "config": {
            "activation": arch.output_activation,
            "units": arch.output_dim,
        },
    })
    return records


register_action(MaeRandomSamplingAction())
register_action(ArchitectureOptimizationAction())


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _write_document(document: dict, output_path: str | None) -> None:
    payload = json.dumps(document, indent=2) + "\n"
    if output_path:
        with open(output_path, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one config-driven run; returns the process exit code."""
    parser = argparse.ArgumentParser(
        prog="evornn",
        description="Training-free RNN architecture evaluation and evolutionary search.",
    )
    parser.add_argument("--config", required=True, help="path to a JSON run config")
    parser.add_argument("--verbose", type=int, default=0, choices=(0, 1, 2),
                        help="0 quiet, 1 progress, 2 per-evaluation detail")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    level = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}[args.verbose]
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )

    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = parse_run_config(doc)
        action = _REGISTRY.get(cfg.action)
        if action is None:
            raise ConfigError(
                f"unknown action {cfg.action!r}; registered actions: "
                + ", ".join(registered_actions())
            )
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        document = action.execute(cfg)
        _write_document(document, cfg.output_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 -- contract: diagnose, never crash
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
