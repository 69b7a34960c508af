"""Sampling fitness tests: weight draws, truncated-normal fit, tail probabilities.

Expected values come from independent oracles: a rejection sampler for
truncated-normal data, mpmath high-precision CDFs, and direct quadrature of
the normal density.
"""

import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from evornn import (
    Architecture,
    DegenerateSamplesError,
    MaeSamplingProblem,
    fit_truncated_normal,
    flatten_weights,
    generate_sine,
    mae_random_sampling,
    sample_weights,
    spawn_rng,
    truncated_tail_log_prob,
    window,
)
from evornn.sampling import truncated_normal_log_likelihood


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def rejection_truncated_normal(mu, sigma, lower, n, rng):
    """Draw from normal(mu, sigma) conditioned on >= lower, by rejection."""
    out = []
    while len(out) < n:
        draws = rng.normal(mu, sigma, size=n)
        out.extend(draws[draws >= lower].tolist())
    return np.asarray(out[:n])


def mp_tail_prob(threshold, mu, sigma, lower):
    """High-precision truncated tail probability via mpmath's normal CDF."""
    with mpmath.workdps(60):
        z_t = (mpmath.mpf(threshold) - mu) / sigma
        z_l = (mpmath.mpf(lower) - mu) / sigma
        num = mpmath.ncdf(z_t) - mpmath.ncdf(z_l)
        den = 1 - mpmath.ncdf(z_l)
        return num / den


def quad_tail_prob(threshold, mu, sigma, lower):
    """Tail probability by numerical integration of the normal density."""
    def pdf(x):
        z = (x - mu) / sigma
        return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))

    num, _ = quad(pdf, lower, threshold)
    den, _ = quad(pdf, lower, np.inf)
    return num / den


# ---------------------------------------------------------------------------
# sample_weights
# ---------------------------------------------------------------------------

def test_sample_weights_deterministic():
    arch = Architecture((1, 2, 2, 1), 2)
    a = flatten_weights(sample_weights(arch, spawn_rng(42, 3)))
    b = flatten_weights(sample_weights(arch, spawn_rng(42, 3)))
    c = flatten_weights(sample_weights(arch, spawn_rng(42, 4)))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_weights_element_count():
    arch = Architecture((1, 2, 2, 1), 2)
    assert flatten_weights(sample_weights(arch, spawn_rng(0))).size == 75


def test_sample_weights_standard_normal_moments():
    arch = Architecture((1, 2, 2, 1), 2)
    pooled = []
    index = 0
    while len(pooled) < 10_000:
        pooled.extend(flatten_weights(sample_weights(arch, spawn_rng(123, index))).tolist())
        index += 1
    pooled = np.asarray(pooled[:10_000])
    assert abs(pooled.mean()) < 0.05
    assert abs(pooled.std() - 1.0) < 0.05


# ---------------------------------------------------------------------------
# fit_truncated_normal
# ---------------------------------------------------------------------------

def test_fit_recovers_generating_parameters():
    rng = np.random.default_rng(2024)
    samples = rejection_truncated_normal(0.8, 0.11, 0.0, 10_000, rng)
    mu, sigma = fit_truncated_normal(samples, lower=0.0)
    assert mu == pytest.approx(0.8, abs=0.01)
    assert sigma == pytest.approx(0.11, abs=0.01)


def test_fit_equals_plain_mle_far_from_truncation():
    rng = np.random.default_rng(5)
    samples = rng.normal(10.0, 0.5, size=4000)  # min >> 0 + 6 std
    assert samples.min() > 0.0 + 6 * samples.std()
    mu, sigma = fit_truncated_normal(samples, lower=0.0)
    assert mu == pytest.approx(float(samples.mean()), abs=1e-3)
    assert sigma == pytest.approx(float(samples.std()), abs=1e-3)


def test_fit_degenerate_samples():
    with pytest.raises(DegenerateSamplesError):
        fit_truncated_normal([0.5, 0.5])
    with pytest.raises(DegenerateSamplesError):
        fit_truncated_normal([0.5])


def test_fit_rejects_samples_below_bound():
    with pytest.raises(ValueError, match="truncation"):
        fit_truncated_normal([0.5, -0.1, 0.7], lower=0.0)


def test_fit_never_worse_than_moment_start():
    rng = np.random.default_rng(77)
    for trial in range(5):
        samples = rejection_truncated_normal(0.3, 0.25, 0.0, 500, rng)
        mu, sigma = fit_truncated_normal(samples, lower=0.0)
        fitted = truncated_normal_log_likelihood(samples, mu, sigma, lower=0.0)
        start = truncated_normal_log_likelihood(
            samples, float(samples.mean()), float(samples.std()), lower=0.0
        )
        assert fitted >= start - 1e-9


# ---------------------------------------------------------------------------
# truncated_tail_log_prob
# ---------------------------------------------------------------------------

def test_tail_matches_quadrature_oracle():
    p, log_p = truncated_tail_log_prob(0.3, mu=0.5, sigma=0.1, lower=0.0)
    oracle = quad_tail_prob(0.3, 0.5, 0.1, 0.0)
    assert p == pytest.approx(oracle, rel=1e-9)
    assert p == pytest.approx(0.022750, abs=5e-7)
    assert log_p == pytest.approx(math.log(p), rel=1e-12)


def test_tail_certain_event():
    assert truncated_tail_log_prob(np.inf, 0.5, 0.1) == (1.0, 0.0)


def test_tail_threshold_at_or_below_lower():
    p, log_p = truncated_tail_log_prob(0.0, 0.5, 0.1, lower=0.0)
    assert p == 0.0 and log_p == -np.inf
    p, log_p = truncated_tail_log_prob(-1.0, 0.5, 0.1, lower=0.0)
    assert p == 0.0 and log_p == -np.inf


def test_tail_rejects_bad_sigma():
    with pytest.raises(ValueError, match="sigma"):
        truncated_tail_log_prob(0.5, 0.5, 0.0)
    with pytest.raises(ValueError, match="sigma"):
        truncated_tail_log_prob(0.5, 0.5, -1.0)


def test_tail_log_matches_mpmath_in_deep_tail():
    # the regime the method lives in: p around 1e-13 and far beyond
    cases = [
        (0.01, 0.81072833698353519, 0.1104613706995357, 0.0),
        (0.05, 0.8, 0.11, 0.0),
        (0.2, 0.9, 0.05, 0.0),
        (0.01, 2.0, 0.05, 0.0),   # p underflows double precision
    ]
    for threshold, mu, sigma, lower in cases:
        p, log_p = truncated_tail_log_prob(threshold, mu, sigma, lower)
        with mpmath.workdps(60):
            oracle_log = float(mpmath.log(mp_tail_prob(threshold, mu, sigma, lower)))
        assert log_p == pytest.approx(oracle_log, rel=1e-9)
        if math.isfinite(log_p) and log_p >= math.log(5e-324) + 1:
            assert p == pytest.approx(math.exp(log_p), rel=1e-12)
        if oracle_log < math.log(5e-324):
            assert p == 0.0 and math.isfinite(log_p)


def test_tail_log_identity_where_representable():
    rng = np.random.default_rng(1)
    for _ in range(200):
        mu = float(rng.uniform(0.0, 2.0))
        sigma = float(rng.uniform(0.01, 1.0))
        threshold = float(rng.uniform(0.0, 2.5))
        if threshold <= 0.0:
            continue
        p, log_p = truncated_tail_log_prob(threshold, mu, sigma, 0.0)
        if p > 1e-300:
            assert log_p == pytest.approx(math.log(p), rel=1e-12)
        assert 0.0 <= p <= 1.0
        assert log_p <= 0.0


def test_tail_monotone_in_threshold():
    mu, sigma = 0.7, 0.12
    thresholds = np.linspace(0.001, 2.0, 100)
    values = [truncated_tail_log_prob(t, mu, sigma, 0.0)[0] for t in thresholds]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# mae_random_sampling
# ---------------------------------------------------------------------------

ARCH = Architecture((1, 2, 2, 1), 2)
DATA = window(generate_sine(60, 20), 2)


def test_sampling_deterministic_across_workers():
    one = mae_random_sampling(ARCH, DATA, 40, 0.01, seed=7, workers=1)
    two = mae_random_sampling(ARCH, DATA, 40, 0.01, seed=7, workers=3)
    assert one == two
    three = mae_random_sampling(ARCH, DATA, 40, 0.01, seed=8, workers=1)
    assert three.samples != one.samples


def test_sampling_sample_i_depends_only_on_seed_and_index():
    stats = mae_random_sampling(ARCH, DATA, 12, 0.01, seed=31)
    from evornn import mae, predict
    weights = sample_weights(ARCH, spawn_rng(31, 5))
    direct = mae(predict(ARCH, weights, DATA), DATA.targets)
    assert stats.samples[5] == direct


def test_sampling_stats_fields():
    stats = mae_random_sampling(ARCH, DATA, 25, 0.01, seed=3)
    assert len(stats.samples) == 25
    arr = np.asarray(stats.samples)
    assert stats.mean == pytest.approx(float(arr.mean()))
    assert stats.std == pytest.approx(float(arr.std()))  # population convention
    assert stats.threshold == 0.01
    assert stats.log_p <= 0.0
    assert 0.0 <= stats.p <= 1.0
    assert stats.trunc_sigma > 0.0


def test_sampling_mean_agrees_with_large_rerun():
    small = mae_random_sampling(ARCH, DATA, 100, 0.01, seed=11)
    big = mae_random_sampling(ARCH, DATA, 10_000, 0.01, seed=12)
    tolerance = 3.0 * small.std / math.sqrt(100)
    assert abs(small.mean - big.mean) < tolerance


def test_sampling_requires_enough_samples():
    with pytest.raises(ValueError, match="2"):
        mae_random_sampling(ARCH, DATA, 1, 0.01, seed=0)


def test_sampling_problem_decode_and_evaluate():
    series = generate_sine(60, 20)
    problem = MaeSamplingProblem(series, n_samples=10, threshold=0.05, seed=5)
    arch = problem.decode([2, 2], 2)
    assert arch.layer_sizes == (1, 2, 2, 1) and arch.look_back == 2
    first = problem.evaluate(arch)
    second = problem.evaluate(arch)
    assert first == second  # pure function of the architecture
    assert set(first) == {"log_p", "p", "mean", "std"}
    other = problem.evaluate(problem.decode([3], 4))
    assert other != first
