"""Time-series supply: sine-wave generation, delimited-text loading, windowing."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TimeSeriesDataset:
    """A dense multivariate series, shape (time steps, features)."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ValueError(f"series must be 2-D (T x F), got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError(f"series needs at least 2 time steps, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series contains missing or non-finite entries")
        object.__setattr__(self, "values", arr)

    @property
    def num_steps(self) -> int:
        return self.values.shape[0]

    @property
    def num_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WindowedDataset:
    """Sliding-window pairs: inputs (N, look_back, F) and next-step targets (N, F).

    Window i covers steps i..i+look_back-1 of the source series and its target
    is step i+look_back, so N = T - look_back.
    """

    inputs: np.ndarray
    targets: np.ndarray
    look_back: int

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if inputs.ndim != 3:
            raise ValueError(f"inputs must be 3-D (N x look_back x F), got {inputs.shape}")
        if targets.ndim != 2:
            raise ValueError(f"targets must be 2-D (N x F), got {targets.shape}")
        if self.look_back < 1:
            raise ValueError(f"look_back must be >= 1, got {self.look_back}")
        if inputs.shape[1] != self.look_back:
            raise ValueError(f"inputs window length {inputs.shape[1]} != look_back {self.look_back}")
        if inputs.shape[0] != targets.shape[0] or inputs.shape[2] != targets.shape[1]:
            raise ValueError(f"inputs {inputs.shape} inconsistent with targets {targets.shape}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def num_windows(self) -> int:
        return self.inputs.shape[0]

    @property
    def num_features(self) -> int:
        return self.inputs.shape[2]


def generate_sine(
    n: int,
    period: float,
    amplitude: float = 1.0,
    phase: float = 0.0,
    noise_std: float = 0.0,
    seed: int | None = None,
) -> TimeSeriesDataset:
    """Sample amplitude*sin(2*pi*t/period + phase) at t = 0..n-1, plus optional noise.

    With ``noise_std`` 0 the output is independent of ``seed``.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if period <= 0:
        raise ValueError(f"period must be positive, got {period}")
    t = np.arange(n, dtype=float)
    values = amplitude * np.sin(2.0 * np.pi * t / period + phase)
    if noise_std > 0.0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_std, size=n)
    return TimeSeriesDataset(values.reshape(-1, 1))


def load_series(path) -> TimeSeriesDataset:
    """Load a comma-delimited series: one row per time step, one column per feature.

    A non-numeric first row is treated as a header and skipped.  All data rows
    must have the same column count; errors name the offending 1-based row.
    """
    with open(path, newline="") as fh:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(fh)) if row]
    if not rows:
        raise ValueError(f"{path}: empty series file")

    def parse(cells):
        return [float(c) for c in cells]

    start = 0
    try:
        parse(rows[0][1])
    except ValueError:
        start = 1  # header row
    data_rows = rows[start:]
    if not data_rows:
        raise ValueError(f"{path}: no data rows after header")

    width = len(data_rows[0][1])
    parsed = []
    for line_no, cells in data_rows:
        if len(cells) != width:
            raise ValueError(
                f"{path}: row {line_no} has {len(cells)} columns, expected {width}"
            )
        try:
            parsed.append(parse(cells))
        except ValueError as exc:
            raise ValueError(f"{path}: row {line_no}: {exc}") from None
    return TimeSeriesDataset(np.asarray(parsed))


def window(data: TimeSeriesDataset, look_back: int) -> WindowedDataset:
    """Slice a series into all N = T - look_back (window, next value) pairs, in order."""
    if look_back < 1:
        raise ValueError(f"look_back must be >= 1, got {look_back}")
    if look_back >= data.num_steps:
        raise ValueError(
            f"look_back {look_back} leaves no windows in a series of {data.num_steps} steps"
        )
    values = data.values
    n = data.num_steps - look_back
    inputs = np.stack([values[i : i + look_back] for i in range(n)])
    targets = values[look_back:].copy()
    return WindowedDataset(inputs, targets, look_back)


def split_series(data: TimeSeriesDataset, train_fraction: float) -> tuple[TimeSeriesDataset, TimeSeriesDataset]:
    """Chronological train/test split; both parts keep at least 2 steps."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    cut = int(round(data.num_steps * train_fraction))
    cut = min(max(cut, 2), data.num_steps - 2)
    return TimeSeriesDataset(data.values[:cut]), TimeSeriesDataset(data.values[cut:])
