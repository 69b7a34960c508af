"""MAE random sampling: the training-free architecture fitness.

For a fixed architecture, draw many random weight realizations, collect the
MAE each one achieves, fit a truncated normal (MAE is nonnegative, so the
distribution is cut at zero), and report the probability p -- and its natural
log -- that a random draw lands below a user threshold.  log_p is the fitness
signal architecture search runs on.

All tail math happens in log space: good architectures in the deep tail push
p far below what double precision can represent, while log_p stays finite.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import log_ndtr

from .core import Architecture, Problem
from .data import TimeSeriesDataset, WindowedDataset, window
from .network import mae, param_count, predict, weights_from_flat, WeightSet

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


class DegenerateSamplesError(ValueError):
    """Raised when a sample set carries no distributional information."""


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Child random stream for (seed, key...).

    The same (seed, key) pair always yields the same stream, independent of
    which worker asks and in which order -- this is what makes parallel and
    serial runs bit-identical.
    """
    entropy = tuple(int(k) & _MASK64 for k in (seed, *key))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *key: int) -> int:
    """Collapse (seed, key...) into a single integer seed, deterministically."""
    entropy = tuple(int(k) & _MASK64 for k in (seed, *key))
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def sample_weights(arch: Architecture, rng: np.random.Generator) -> WeightSet:
    """Draw one random weight realization, every element i.i.d. standard normal.

    Consumes exactly param_count(arch) variates in canonical tensor order:
    layers in depth order, within a layer input kernel row-major, recurrent
    kernel row-major, then bias; finally dense kernel and dense bias.
    """
    return weights_from_flat(arch, rng.standard_normal(param_count(arch)))


def _truncated_normal_nll(params, samples: np.ndarray, lower: float) -> float:
    mu, sigma = params
    if sigma <= 0.0:
        return np.inf
    z = (samples - mu) / sigma
    # log phi(z) - log sigma - log(1 - Phi((lower - mu) / sigma))
    log_pdf = -0.5 * z * z - 0.5 * np.log(2.0 * np.pi) - np.log(sigma)
    log_norm = log_ndtr((mu - lower) / sigma)
    return float(-(np.sum(log_pdf) - samples.size * log_norm))


def truncated_normal_log_likelihood(
    samples: Sequence[float], mu: float, sigma: float, lower: float = 0.0
) -> float:
    """Log-likelihood of samples under a normal(mu, sigma) truncated below at ``lower``."""
    arr = np.asarray(samples, dtype=float)
    return -_truncated_normal_nll((mu, sigma), arr, lower)


def fit_truncated_normal(samples: Sequence[float], lower: float = 0.0) -> tuple[float, float]:
    """Maximum-likelihood (mu, sigma) of a below-truncated normal.

    Derivative-free simplex search started at the sample mean and population
    standard deviation; stops when the simplex spread drops below 1e-8 or
    after 2000 iterations.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size < 2:
        raise DegenerateSamplesError(f"need at least 2 samples to fit, got {arr.size}")
    if np.any(arr < lower):
        raise ValueError(f"samples below the truncation bound {lower} are impossible")
    mean = float(arr.mean())
    std = float(arr.std())
    if std == 0.0:
        raise DegenerateSamplesError("all samples identical; cannot fit a scale")
    result = minimize(
        _truncated_normal_nll,
        x0=np.array([mean, std]),
        args=(arr, lower),
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-8, "maxiter": 2000, "maxfev": 4000},
    )
    mu, sigma = result.x
    return float(mu), float(sigma)


def _log_ndtr_diff(hi: float, lo: float) -> float:
    """log(Phi(hi) - Phi(lo)) for hi >= lo, stable in both tails."""
    if lo >= 0.0:
        # both points in the right half: work on the complementary side,
        # where log_ndtr keeps full precision
        a, b = log_ndtr(-lo), log_ndtr(-hi)
    else:
        a, b = log_ndtr(hi), log_ndtr(lo)
    # a >= b; log(exp(a) - exp(b)) = a + log1p(-exp(b - a))
    if b - a >= 0.0:
        return -np.inf
    return float(a + np.log1p(-np.exp(b - a)))


def truncated_tail_log_prob(
    threshold: float, mu: float, sigma: float, lower: float = 0.0
) -> tuple[float, float]:
    """Probability (and its log) that a truncated normal falls below ``threshold``.

    p = [Phi((T-mu)/sigma) - Phi((L-mu)/sigma)] / [1 - Phi((L-mu)/sigma)],
    computed entirely in log space so log_p stays finite and accurate even
    when p underflows double precision.  Returns (p, log_p) with p clamped to
    [0, 1] and log_p <= 0; threshold <= lower yields (0.0, -inf).
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if threshold <= lower:
        return 0.0, -np.inf
    if np.isinf(threshold):
        return 1.0, 0.0
    z_t = (threshold - mu) / sigma
    z_l = (lower - mu) / sigma
    log_num = _log_ndtr_diff(z_t, z_l)
    log_den = float(log_ndtr(-z_l))  # log(1 - Phi(z_l))
    log_p = min(log_num - log_den, 0.0)
    if np.isneginf(log_p):
        return 0.0, -np.inf
    return float(np.exp(log_p)), float(log_p)


@dataclass(frozen=True)
class MaeSamplingStats:
    """Everything one sampling run produced, in sample-index order."""

    samples: tuple[float, ...]
    mean: float
    std: float            # population (n divisor) convention
    trunc_mu: float
    trunc_sigma: float
    threshold: float
    p: float
    log_p: float


def mae_random_sampling(
    arch: Architecture,
    data: WindowedDataset,
    n_samples: int,
    threshold: float,
    seed: int,
    workers: int = 1,
) -> MaeSamplingStats:
    """Estimate an architecture's promise from the MAE of random weight draws.

    Sample i uses a child stream derived from (seed, i) only, so results do
    not depend on ``workers`` or scheduling.  Raises DegenerateSamplesError
    when every draw produced the same MAE.
    """
    if n_samples < 2:
        raise ValueError(f"need at least 2 samples, got {n_samples}")
    if threshold <= 0.0:
        raise ValueError(f"threshold must be positive, got {threshold}")

    def one(index: int) -> float:
        weights = sample_weights(arch, spawn_rng(seed, index))
        return mae(predict(arch, weights, data), data.targets)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(one, range(n_samples)))
    else:
        samples = [one(i) for i in range(n_samples)]

    arr = np.asarray(samples)
    mean = float(arr.mean())
    std = float(arr.std())
    if std == 0.0:
        raise DegenerateSamplesError("all sampled MAEs identical; distribution is degenerate")
    trunc_mu, trunc_sigma = fit_truncated_normal(arr, lower=0.0)
    p, log_p = truncated_tail_log_prob(threshold, trunc_mu, trunc_sigma, lower=0.0)
    logger.debug(
        "sampling done: mean=%.6f std=%.6f trunc_mu=%.6f trunc_sigma=%.6f log_p=%.6f",
        mean, std, trunc_mu, trunc_sigma, log_p,
    )
    return MaeSamplingStats(
        samples=tuple(float(s) for s in samples),
        mean=mean,
        std=std,
        trunc_mu=float(trunc_mu),
        trunc_sigma=float(trunc_sigma),
        threshold=float(threshold),
        p=float(p),
        log_p=float(log_p),
    )


class MaeSamplingProblem(Problem):
    """The sampling fitness packaged behind the problem contract.

    Holds the raw series; each evaluation windows it at the architecture's own
    look-back.  The per-genome seed is derived from (seed, genome), which makes
    evaluate() a pure function of the architecture -- the same genome always
    sees the same weight draws within a run.
    """

    def __init__(
        self,
        series: TimeSeriesDataset,
        n_samples: int,
        threshold: float,
        seed: int,
        workers: int = 1,
    ):
        self.series = series
        self.n_samples = n_samples
        self.threshold = threshold
        self.seed = seed
        self.workers = workers

    def decode(self, hidden_layers: Sequence[int], look_back: int) -> Architecture:
        dims = self.series.num_features
        return Architecture((dims, *hidden_layers, dims), look_back)

    def evaluate(self, architecture: Architecture) -> dict[str, float]:
        windows = window(self.series, architecture.look_back)
        genome_seed = derive_seed(
            self.seed, architecture.look_back, len(architecture.hidden_sizes),
            *architecture.hidden_sizes,
        )
        stats = self.sample(architecture, windows, genome_seed)
        return {"log_p": stats.log_p, "p": stats.p, "mean": stats.mean, "std": stats.std}

    def sample(
        self, architecture: Architecture, windows: WindowedDataset, seed: int
    ) -> MaeSamplingStats:
        return mae_random_sampling(
            architecture, windows, self.n_samples, self.threshold, seed, workers=self.workers
        )
