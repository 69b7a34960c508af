"""Shared search-space types and the problem/solution contracts.

Everything here is an immutable value object: optimizers, samplers and the
CLI exchange these types without ever mutating them, so they are safe to
share across concurrent workers.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping, Sequence

if TYPE_CHECKING:
    from .network import WeightSet

HIDDEN_ACTIVATIONS = ("tanh",)
RECURRENT_ACTIVATIONS = ("sigmoid",)
OUTPUT_ACTIVATIONS = ("linear",)


@dataclass(frozen=True)
class Architecture:
    """A stacked-LSTM layout plus the input window length.

    ``layer_sizes[0]`` is the input feature count, ``layer_sizes[-1]`` the
    output dimension, and every interior entry is the width of one hidden
    recurrent layer.  ``look_back`` is the number of past time steps the
    network sees per prediction.
    """

    layer_sizes: tuple[int, ...]
    look_back: int
    hidden_activation: str = "tanh"
    recurrent_activation: str = "sigmoid"
    output_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        object.__setattr__(self, "look_back", int(self.look_back))
        if len(self.layer_sizes) < 3:
            raise ValueError(
                "layer_sizes needs an input width, at least one hidden layer and "
                f"an output width, got {list(self.layer_sizes)}"
            )
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError(f"every layer size must be >= 1, got {list(self.layer_sizes)}")
        if self.look_back < 1:
            raise ValueError(f"look_back must be >= 1, got {self.look_back}")
        if self.hidden_activation not in HIDDEN_ACTIVATIONS:
            raise ValueError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.recurrent_activation not in RECURRENT_ACTIVATIONS:
            raise ValueError(f"unsupported recurrent activation {self.recurrent_activation!r}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unsupported output activation {self.output_activation!r}")

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return self.layer_sizes[1:-1]


@dataclass(frozen=True)
class SearchSpace:
    """Bounds of the architecture search.

    Input and output dimensions are owned by the problem being solved, not
    searched; they ride along so optimizers can decode genomes into full
    architectures without touching the data.
    """

    min_hidden_layers: int
    max_hidden_layers: int
    min_neurons: int
    max_neurons: int
    min_look_back: int
    max_look_back: int
    input_dim: int = 1
    output_dim: int = 1

    def __post_init__(self):
        pairs = [
            ("hidden_layers", self.min_hidden_layers, self.max_hidden_layers),
            ("neurons", self.min_neurons, self.max_neurons),
            ("look_back", self.min_look_back, self.max_look_back),
        ]
        for name, lo, hi in pairs:
            if lo < 1:
                raise ValueError(f"min_{name} must be >= 1, got {lo}")
            if lo > hi:
                raise ValueError(f"min_{name} {lo} > max_{name} {hi}")
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be >= 1")


@dataclass(frozen=True)
class Solution:
    """An architecture, optionally a concrete weight realization, and its metrics.

    ``metrics`` maps metric names (e.g. ``"log_p"``) to real values.  If
    ``weights`` is present its shapes must match ``architecture`` (enforced by
    the forward pass in :mod:`evornn.network`).
    """

    architecture: Architecture
    weights: "WeightSet | None" = None
    metrics: Mapping[str, float] = field(default_factory=dict)


def validate_architecture(arch: Architecture, space: SearchSpace) -> list[str]:
    """Return one description per bound of ``space`` violated by ``arch``.

    An empty list means the architecture lies inside the search space.
    Violations are data, not errors: callers decide what to do with them.
    """
    violations = []
    n_hidden = len(arch.hidden_sizes)
    if n_hidden < space.min_hidden_layers:
        violations.append(f"hidden layers {n_hidden} < min {space.min_hidden_layers}")
    if n_hidden > space.max_hidden_layers:
        violations.append(f"hidden layers {n_hidden} > max {space.max_hidden_layers}")
    for width in arch.hidden_sizes:
        if width < space.min_neurons:
            violations.append(f"neurons {width} < min {space.min_neurons}")
        if width > space.max_neurons:
            violations.append(f"neurons {width} > max {space.max_neurons}")
    if arch.look_back < space.min_look_back:
        violations.append(f"look_back {arch.look_back} < min {space.min_look_back}")
    if arch.look_back > space.max_look_back:
        violations.append(f"look_back {arch.look_back} > max {space.max_look_back}")
    if arch.input_dim != space.input_dim:
        violations.append(f"input dim {arch.input_dim} != required {space.input_dim}")
    if arch.output_dim != space.output_dim:
        violations.append(f"output dim {arch.output_dim} != required {space.output_dim}")
    return violations


def solution_fitness(solution: Solution, key: str) -> float:
    """Read the stored metric ``key`` from ``solution``; higher log_p = fitter."""
    try:
        return solution.metrics[key]
    except KeyError:
        have = sorted(solution.metrics)
        raise KeyError(f"metric {key!r} not present in solution (have {have})") from None


class Problem(ABC):
    """Contract between a task and the optimizers.

    A problem knows two things: how to decode a genome (hidden widths plus
    look-back) into a full :class:`Architecture`, and how to evaluate an
    architecture into a metrics map.  Optimizers never see the underlying
    data.
    """

    @abstractmethod
    def decode(self, hidden_layers: Sequence[int], look_back: int) -> Architecture:
        """Expand a genome into a concrete architecture."""

    @abstractmethod
    def evaluate(self, architecture: Architecture) -> dict[str, float]:
        """Score an architecture; must be a pure function of the architecture."""
