"""Forward-only evaluation of stacked-LSTM networks and the MAE metric.

This is the compute kernel behind every random sample and every fitness
evaluation.  There is no training here: weights come in from outside, state
resets to zero for every window, and all arithmetic is double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import Architecture
from .data import WindowedDataset


@dataclass(frozen=True)
class LayerWeights:
    """One LSTM layer: gate rows stacked in the order [input, forget, candidate, output]."""

    input_kernel: np.ndarray      # (4H, D)
    recurrent_kernel: np.ndarray  # (4H, H)
    bias: np.ndarray              # (4H,)


@dataclass(frozen=True)
class WeightSet:
    """All tensors of one concrete network realization for a given architecture."""

    layers: tuple[LayerWeights, ...]
    dense_kernel: np.ndarray  # (O, H_last)
    dense_bias: np.ndarray    # (O,)

    @property
    def num_elements(self) -> int:
        total = 0
        for layer in self.layers:
            total += layer.input_kernel.size + layer.recurrent_kernel.size + layer.bias.size
        return total + self.dense_kernel.size + self.dense_bias.size


def tensor_shapes(arch: Architecture) -> list[tuple[int, ...]]:
    """Tensor shapes in canonical order: per hidden layer the input kernel,
    recurrent kernel and bias, then the dense kernel and dense bias.

    This order also defines how flat vectors map onto weight sets (row-major
    within each tensor).
    """
    shapes: list[tuple[int, ...]] = []
    for d, h in zip(arch.layer_sizes[:-2], arch.hidden_sizes):
        shapes.extend([(4 * h, d), (4 * h, h), (4 * h,)])
    shapes.extend([(arch.output_dim, arch.layer_sizes[-2]), (arch.output_dim,)])
    return shapes


def param_count(arch: Architecture) -> int:
    """Total number of weight elements: sum of 4*(D*H + H^2 + H) over hidden layers
    plus the dense layer's H_last*O + O."""
    total = 0
    for d, h in zip(arch.layer_sizes[:-2], arch.hidden_sizes):
        total += 4 * (d * h + h * h + h)
    return total + arch.layer_sizes[-2] * arch.output_dim + arch.output_dim


def weights_from_flat(arch: Architecture, flat: np.ndarray) -> WeightSet:
    """Reshape a flat vector of length param_count(arch) into a WeightSet,
    consuming elements in canonical tensor order."""
    flat = np.asarray(flat, dtype=float).ravel()
    expected = param_count(arch)
    if flat.size != expected:
        raise ValueError(f"flat vector has {flat.size} elements, architecture needs {expected}")
    chunks = []
    offset = 0
    for shape in tensor_shapes(arch):
        size = int(np.prod(shape))
        chunks.append(flat[offset : offset + size].reshape(shape))
        offset += size
    layers = tuple(
        LayerWeights(chunks[3 * i], chunks[3 * i + 1], chunks[3 * i + 2])
        for i in range(len(arch.hidden_sizes))
    )
    return WeightSet(layers, chunks[-2], chunks[-1])


def flatten_weights(weights: WeightSet) -> np.ndarray:
    """Inverse of weights_from_flat: concatenate tensors in canonical order."""
    parts = []
    for layer in weights.layers:
        parts.extend([layer.input_kernel.ravel(), layer.recurrent_kernel.ravel(), layer.bias.ravel()])
    parts.extend([weights.dense_kernel.ravel(), weights.dense_bias.ravel()])
    return np.concatenate(parts)


def zero_weights(arch: Architecture) -> WeightSet:
    """All-zero realization; predicts exactly 0 everywhere."""
    return weights_from_flat(arch, np.zeros(param_count(arch)))


def check_compatible(arch: Architecture, weights: WeightSet) -> None:
    """Raise if the weight tensors do not match the architecture's shapes."""
    shapes = tensor_shapes(arch)
    if len(weights.layers) != len(arch.hidden_sizes):
        raise ValueError(
            f"weight set has {len(weights.layers)} hidden layers, "
            f"architecture has {len(arch.hidden_sizes)}"
        )
    actual = []
    for layer in weights.layers:
        actual.extend([layer.input_kernel.shape, layer.recurrent_kernel.shape, layer.bias.shape])
    actual.extend([weights.dense_kernel.shape, weights.dense_bias.shape])
    for got, want in zip(actual, shapes):
        if tuple(got) != tuple(want):
            raise ValueError(f"weight tensor shape {got} does not match expected {want}")


def lstm_cell_step(
    x: np.ndarray, h: np.ndarray, c: np.ndarray, layer: LayerWeights
) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM time step on vectors.

    i = sigmoid(Wi x + Ui h + bi), f = sigmoid(Wf x + Uf h + bf),
    g = tanh(Wg x + Ug h + bg),    o = sigmoid(Wo x + Uo h + bo),
    c' = f*c + i*g, h' = o*tanh(c').
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    c = np.asarray(c, dtype=float)
    four_h, d = layer.input_kernel.shape
    units = four_h // 4
    if x.shape != (d,):
        raise ValueError(f"input has shape {x.shape}, layer expects ({d},)")
    if h.shape != (units,) or c.shape != (units,):
        raise ValueError(f"state has shape {h.shape}/{c.shape}, layer expects ({units},)")
    z = layer.input_kernel @ x + layer.recurrent_kernel @ h + layer.bias
    i = expit(z[:units])
    f = expit(z[units : 2 * units])
    g = np.tanh(z[2 * units : 3 * units])
    o = expit(z[3 * units :])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def predict(arch: Architecture, weights: WeightSet, data: WindowedDataset) -> np.ndarray:
    """Run every window through the stacked layers and the linear output head.

    State is reset to zero per window (windows are independent samples); the
    prediction for a window is taken at its final time step.  Returns an
    (N, output_dim) matrix.
    """
    if data.look_back != arch.look_back:
        raise ValueError(f"data look_back {data.look_back} != architecture look_back {arch.look_back}")
    if data.num_features != arch.input_dim:
        raise ValueError(f"data has {data.num_features} features, architecture expects {arch.input_dim}")
    check_compatible(arch, weights)

    n = data.num_windows
    if n == 0:
        return np.zeros((0, arch.output_dim))

    seq = data.inputs  # (N, look_back, D)
    for layer, units in zip(weights.layers, arch.hidden_sizes):
        wt = layer.input_kernel.T
        ut = layer.recurrent_kernel.T
        bias = layer.bias
        h = np.zeros((n, units))
        c = np.zeros((n, units))
        outputs = np.empty((n, arch.look_back, units))
        for t in range(arch.look_back):
            z = seq[:, t, :] @ wt + h @ ut + bias
            i = expit(z[:, :units])
            f = expit(z[:, units : 2 * units])
            g = np.tanh(z[:, 2 * units : 3 * units])
            o = expit(z[:, 3 * units :])
            c = f * c + i * g
            h = o * np.tanh(c)
            outputs[:, t, :] = h
        seq = outputs
    return h @ weights.dense_kernel.T + weights.dense_bias


def mae(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean absolute error over all entries of equally shaped matrices."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch: predictions {predictions.shape} vs targets {targets.shape}")
    if predictions.size == 0:
        raise ValueError("cannot compute MAE of empty input")
    return float(np.mean(np.abs(predictions - targets)))
