"""Evolutionary optimizers over architectures and over weights.

The architecture side is a generational mu+lambda genetic algorithm on
variable-length genomes (hidden widths plus look-back) with log_p fitness;
the weight side is a (mu+lambda) evolution strategy on the flattened weight
vector with MAE as the cost.  Both are deterministic given their seed, no
matter how evaluations are scheduled.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Architecture, SearchSpace, Solution
from .data import WindowedDataset
from .network import WeightSet, flatten_weights, mae, param_count, predict, weights_from_flat
from .sampling import sample_weights, spawn_rng

logger = logging.getLogger(__name__)


@dataclass
class Individual:
    """One genome: hidden layer widths (variable length) plus look-back.

    ``eval_count_at_birth`` records how many evaluation requests the run had
    issued when this individual was created; ties in selection go to the
    elder (smaller value).
    """

    hidden_layers: tuple[int, ...]
    look_back: int
    fitness: float | None = None
    eval_count_at_birth: int = 0

    def genome(self) -> tuple[tuple[int, ...], int]:
        return (self.hidden_layers, self.look_back)


@dataclass(frozen=True)
class EvolutionConfig:
    """All knobs of the architecture GA; every field is explicit in run configs."""

    space: SearchSpace
    population_size: int = 10
    offspring_per_generation: int = 10
    max_evaluations: int = 300
    tournament_size: int = 2
    elitism_count: int = 1
    p_resize_layer: float = 0.3
    p_add_layer: float = 0.1
    p_remove_layer: float = 0.1
    neuron_mutation_sigma: float = 2.0
    look_back_step: int = 2
    crossover_enabled: bool = False
    samples_per_evaluation: int = 30
    threshold: float = 0.01
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.population_size < 1 or self.offspring_per_generation < 1:
            raise ValueError("population_size and offspring_per_generation must be >= 1")
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        if self.tournament_size < 2:
            raise ValueError(f"tournament_size must be >= 2, got {self.tournament_size}")
        if not 0 <= self.elitism_count < self.population_size:
            raise ValueError("elitism_count must be in [0, population_size)")
        for name in ("p_resize_layer", "p_add_layer", "p_remove_layer"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value}")
        if self.neuron_mutation_sigma <= 0.0:
            raise ValueError("neuron_mutation_sigma must be positive")
        if self.look_back_step < 1:
            raise ValueError("look_back_step must be >= 1")
        if self.samples_per_evaluation < 2:
            raise ValueError("samples_per_evaluation must be >= 2")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class GenerationRecord:
    """Fitness trace entry the CLI serializes into optimization documents."""

    generation: int
    best_log_p: float
    mean_log_p: float
    evaluations_used: int


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def random_individual(space: SearchSpace, rng: np.random.Generator) -> Individual:
    """Uniform draw: layer count, each width, and look-back within bounds."""
    n_layers = int(rng.integers(space.min_hidden_layers, space.max_hidden_layers + 1))
    widths = tuple(
        int(rng.integers(space.min_neurons, space.max_neurons + 1)) for _ in range(n_layers)
    )
    look_back = int(rng.integers(space.min_look_back, space.max_look_back + 1))
    return Individual(widths, look_back)


def _clamp(value: int, lo: int, hi: int) -> int:
    return max(lo, min(hi, value))


def _width_step(width: int, sigma: float, space: SearchSpace, rng: np.random.Generator) -> int:
    return _clamp(width + round(rng.normal(0.0, sigma)), space.min_neurons, space.max_neurons)


def mutate(ind: Individual, cfg: EvolutionConfig, rng: np.random.Generator) -> Individual:
    """Perturb widths, optionally add/remove a layer, shift look-back; clamp to bounds.

    If no gene changed, one width is forcibly perturbed so mutation never
    returns an identical genome (except in a fully degenerate space where no
    gene can move at all).
    """
    space = cfg.space
    widths = list(ind.hidden_layers)
    for idx in range(len(widths)):
        if rng.random() < cfg.p_resize_layer:
            widths[idx] = _width_step(widths[idx], cfg.neuron_mutation_sigma, space, rng)
    if rng.random() < cfg.p_add_layer and len(widths) < space.max_hidden_layers:
        position = int(rng.integers(0, len(widths) + 1))
        widths.insert(position, int(rng.integers(space.min_neurons, space.max_neurons + 1)))
    if rng.random() < cfg.p_remove_layer and len(widths) > space.min_hidden_layers:
        del widths[int(rng.integers(0, len(widths)))]
    step = int(rng.integers(-cfg.look_back_step, cfg.look_back_step + 1))
    look_back = _clamp(ind.look_back + step, space.min_look_back, space.max_look_back)

    if tuple(widths) == ind.hidden_layers and look_back == ind.look_back:
        widths, look_back = _force_change(widths, look_back, cfg, rng)
    return Individual(tuple(widths), look_back)


def _force_change(widths, look_back, cfg, rng):
    """Change one gene, preferring a single width perturbation."""
    space = cfg.space
    if space.min_neurons < space.max_neurons:
        idx = int(rng.integers(0, len(widths)))
        for _ in range(16):
            candidate = _width_step(widths[idx], cfg.neuron_mutation_sigma, space, rng)
            if candidate != widths[idx]:
                widths[idx] = candidate
                return widths, look_back
        # tiny sigma can round every step to zero; fall back to a unit move
        widths[idx] = widths[idx] + 1 if widths[idx] < space.max_neurons else widths[idx] - 1
        return widths, look_back
    if space.min_look_back < space.max_look_back:
        look_back = look_back + 1 if look_back < space.max_look_back else look_back - 1
        return widths, look_back
    if len(widths) < space.max_hidden_layers:
        widths.insert(int(rng.integers(0, len(widths) + 1)), space.min_neurons)
        return widths, look_back
    if len(widths) > space.min_hidden_layers:
        del widths[int(rng.integers(0, len(widths)))]
        return widths, look_back
    return widths, look_back  # single-genome space: nothing can change


def cut_splice_crossover(
    a: Individual, b: Individual, space: SearchSpace, rng: np.random.Generator
) -> Individual:
    """Join a prefix of one parent with a suffix of the other.

    The two cut points are independent and uniform, so the child's length can
    differ from both parents'; it is truncated or padded with fresh uniform
    widths to stay inside the layer-count bounds.  Look-back comes from either
    parent with equal probability.
    """
    cut_a = int(rng.integers(0, len(a.hidden_layers) + 1))
    cut_b = int(rng.integers(0, len(b.hidden_layers) + 1))
    child = list(a.hidden_layers[:cut_a]) + list(b.hidden_layers[cut_b:])
    while len(child) > space.max_hidden_layers:
        child.pop()
    while len(child) < space.min_hidden_layers:
        child.append(int(rng.integers(space.min_neurons, space.max_neurons + 1)))
    look_back = a.look_back if rng.random() < 0.5 else b.look_back
    return Individual(tuple(child), look_back)


def _rank_key(ind: Individual):
    # total order: best fitness first, then the elder, then lexicographic genome
    return (-ind.fitness, ind.eval_count_at_birth, ind.hidden_layers, ind.look_back)


def tournament_select(
    population: Sequence[Individual], k: int, rng: np.random.Generator
) -> Individual:
    """Best of k uniform draws with replacement; deterministic tie-breaking."""
    if not population:
        raise ValueError("cannot select from an empty population")
    for ind in population:
        if ind.fitness is None:
            raise ValueError(f"unevaluated individual in population: {ind.genome()}")
    contestants = [population[int(rng.integers(0, len(population)))] for _ in range(k)]
    return min(contestants, key=_rank_key)


# ---------------------------------------------------------------------------
# architecture search
# ---------------------------------------------------------------------------

def _decode(space: SearchSpace, ind: Individual) -> Architecture:
    return Architecture((space.input_dim, *ind.hidden_layers, space.output_dim), ind.look_back)


def evolve_architecture(
    evaluator: Callable[[Architecture], float], cfg: EvolutionConfig
) -> tuple[Solution, list[GenerationRecord]]:
    """Generational mu+lambda search for the architecture with the best log_p.

    Every evaluation request counts against ``max_evaluations``; results are
    memoized by genome, so duplicate genomes spend budget but no compute.  The
    evaluator must be pure (same architecture, same fitness) -- pair it with
    per-genome seeding as in MaeSamplingProblem.
    """
    space = cfg.space
    rng = spawn_rng(cfg.seed)
    memo: dict[tuple[tuple[int, ...], int], float] = {}
    evals = 0

    def evaluate_batch(batch: list[Individual]) -> None:
        pending: dict[tuple, Architecture] = {}
        for ind in batch:
            key = ind.genome()
            if key not in memo and key not in pending:
                pending[key] = _decode(space, ind)
        if pending:
            keys = list(pending)
            archs = [pending[k] for k in keys]
            if cfg.workers > 1:
                with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                    values = list(pool.map(evaluator, archs))
            else:
                values = [evaluator(a) for a in archs]
            memo.update(zip(keys, values))
            for key, value in zip(keys, values):
                logger.debug("evaluated genome %s: log_p=%.6f", key, value)
        for ind in batch:
            ind.fitness = memo[ind.genome()]

    def snapshot(generation: int, population: list[Individual]) -> GenerationRecord:
        fits = [ind.fitness for ind in population]
        return GenerationRecord(
            generation=generation,
            best_log_p=max(fits),
            mean_log_p=float(np.mean(fits)),
            evaluations_used=evals,
        )

    population = []
    for _ in range(cfg.population_size):
        ind = random_individual(space, rng)
        ind.eval_count_at_birth = len(population)
        population.append(ind)
    evals += len(population)
    evaluate_batch(population)
    best = min(population, key=_rank_key)
    history = [snapshot(0, population)]
    logger.info(
        "generation 0: best=%.6f mean=%.6f evaluations=%d",
        history[0].best_log_p, history[0].mean_log_p, evals,
    )

    generation = 0
    while evals < cfg.max_evaluations:
        generation += 1
        offspring = []
        for _ in range(cfg.offspring_per_generation):
            parent = tournament_select(population, cfg.tournament_size, rng)
            if cfg.crossover_enabled:
                other = tournament_select(population, cfg.tournament_size, rng)
                child = cut_splice_crossover(parent, other, space, rng)
            else:
                child = Individual(parent.hidden_layers, parent.look_back)
            child = mutate(child, cfg, rng)
            child.eval_count_at_birth = evals + len(offspring)
            offspring.append(child)
        evals += len(offspring)
        evaluate_batch(offspring)

        combined = sorted(population + offspring, key=_rank_key)
        elites = sorted(population, key=_rank_key)[: cfg.elitism_count]
        chosen = list(elites)
        taken = {id(ind) for ind in chosen}
        for ind in combined:
            if len(chosen) >= cfg.population_size:
                break
            if id(ind) not in taken:
                chosen.append(ind)
                taken.add(id(ind))
        population = chosen

        best = min([best, *population], key=_rank_key)
        record = snapshot(generation, population)
        history.append(record)
        logger.info(
            "generation %d: best=%.6f mean=%.6f evaluations=%d",
            generation, record.best_log_p, record.mean_log_p, evals,
        )

    solution = Solution(_decode(space, best), metrics={"log_p": best.fitness})
    return solution, history


# ---------------------------------------------------------------------------
# weight search
# ---------------------------------------------------------------------------

def evolve_weights(
    arch: Architecture,
    data: WindowedDataset,
    mu: int,
    lam: int,
    sigma: float,
    max_evaluations: int,
    seed: int,
) -> tuple[WeightSet, float]:
    """(mu+lambda) evolution strategy on the flattened weight vector.

    Parents spawn offspring by elementwise N(0, sigma^2) noise; selection
    keeps the mu lowest-MAE vectors, parents included, so the best MAE never
    worsens.  Deterministic given the seed.
    """
    if mu < 1 or lam < 1:
        raise ValueError("mu and lam must be >= 1")
    if sigma < 0.0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    n = param_count(arch)
    rng = spawn_rng(seed)

    def score(vec: np.ndarray) -> float:
        return mae(predict(arch, weights_from_flat(arch, vec), data), data.targets)

    # (cost, birth, vector); birth breaks ties in favor of the incumbent
    parents = []
    for i in range(mu):
        flat = flatten_weights(sample_weights(arch, spawn_rng(seed, i)))
        parents.append((score(flat), i, flat))
    parents.sort(key=lambda entry: entry[:2])
    evals = mu
    births = mu

    while evals < max_evaluations:
        offspring = []
        for _ in range(lam):
            _, _, base = parents[int(rng.integers(0, mu))]
            child = base + rng.normal(0.0, sigma, size=n)
            offspring.append((score(child), births, child))
            births += 1
        evals += lam
        pool = parents + offspring
        pool.sort(key=lambda entry: entry[:2])
        parents = pool[:mu]
        logger.debug("weight ES: best_mae=%.6f evaluations=%d", parents[0][0], evals)

    best_cost, _, best_vec = parents[0]
    return weights_from_flat(arch, best_vec), float(best_cost)
