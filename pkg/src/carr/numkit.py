"""Minimal dense numeric kernel: seeded RNG, activations, dense layers with
hand-derived gradients, and a finite-difference gradient checker.

Everything is float64 and row-major; the networks involved are tiny, so
determinism is worth more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Rng",
    "elu",
    "elu_grad",
    "DenseLayer",
    "dense_forward",
    "dense_backward",
    "grad_check",
    "ConfigurationError",
]


class ConfigurationError(ValueError):
    """Shape or configuration mismatch in a kernel operation."""


class Rng:
    """Counter-based deterministic random stream (Philox under the hood).

    Identical (seed, stream) pairs produce bit-identical draws.  Sub-streams
    for parallel work are derived with :meth:`spawn`; they never overlap.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = (self.seed & 0xFFFFFFFFFFFFFFFF) | (self.stream << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, offset: int) -> "Rng":
        """Derive an independent sub-stream; offset must be unique per use."""
        return Rng(self.seed, self.stream + 1 + int(offset))

    def uniform(self, lo: float = 0.0, hi: float = 1.0, size=None) -> np.ndarray:
        return self._gen.uniform(lo, hi, size=size)

    def normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size=size)

    def integers(self, lo: int, hi: int, size=None):
        return self._gen.integers(lo, hi, size=size)

    def shuffle_index(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def elu(x):
    """ELU activation: x for x > 0, exp(x) - 1 otherwise."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    """Derivative of ELU: 1 for x > 0, exp(x) for x <= 0."""
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


_ACTIVATIONS = ("identity", "elu")


@dataclass
class DenseLayer:
    """Fully-connected layer: out = act(x @ W.T + b)."""

    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: str = "identity"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ConfigurationError("weights must be 2-D and bias 1-D")
        if self.weights.shape[0] != self.bias.shape[0]:
            raise ConfigurationError(
                f"bias length {self.bias.shape[0]} != out_dim {self.weights.shape[0]}"
            )
        if self.activation not in _ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


def init_dense(rng: Rng, in_dim: int, out_dim: int, activation: str = "identity",
               scale: float | None = None) -> DenseLayer:
    """Glorot-uniform initialized layer with zero bias."""
    if scale is None:
        scale = np.sqrt(6.0 / (in_dim + out_dim))
    w = rng.uniform(-scale, scale, size=(out_dim, in_dim))
    return DenseLayer(weights=w, bias=np.zeros(out_dim), activation=activation)


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    """Forward pass on a (n, in_dim) batch."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != layer.in_dim:
        raise ConfigurationError(
            f"input shape {x.shape} incompatible with in_dim {layer.in_dim}"
        )
    pre = x @ layer.weights.T + layer.bias
    if layer.activation == "elu":
        return elu(pre)
    return pre


def dense_backward(layer: DenseLayer, cached_input: np.ndarray,
                   upstream_grad: np.ndarray):
    """Gradients of a scalar loss given d(loss)/d(output).

    Returns (input_grad, weight_grad, bias_grad).  The pre-activation is
    recomputed from the cached input; the layers here are small enough that
    this costs less than carrying extra state around.
    """
    x = np.asarray(cached_input, dtype=float)
    g = np.asarray(upstream_grad, dtype=float)
    if x.shape[0] != g.shape[0] or g.shape[1] != layer.out_dim:
        raise ConfigurationError(
            f"upstream shape {g.shape} incompatible with cached input {x.shape}"
        )
    pre = x @ layer.weights.T + layer.bias
    if layer.activation == "elu":
        g = g * elu_grad(pre)
    weight_grad = g.T @ x
    bias_grad = g.sum(axis=0)
    input_grad = g @ layer.weights
    return input_grad, weight_grad, bias_grad


def grad_check(f, params: np.ndarray, eps: float = 1e-5) -> float:
    """Compare an analytic gradient against central finite differences.

    ``f(params)`` must return ``(value, grad)`` with grad the analytic
    gradient of the scalar value.  Returns the max over coordinates of
    ``|analytic - numeric| / max(1, |numeric|)``.
    """
    params = np.asarray(params, dtype=float)
    _, analytic = f(params)
    analytic = np.asarray(analytic, dtype=float)
    worst = 0.0
    for i in range(params.size):
        bumped = params.copy()
        bumped[i] += eps
        hi, _ = f(bumped)
        bumped[i] -= 2 * eps
        lo, _ = f(bumped)
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise FloatingPointError("non-finite loss during finite differencing")
        numeric = (hi - lo) / (2 * eps)
        err = abs(analytic[i] - numeric) / max(1.0, abs(numeric))
        worst = max(worst, err)
    return worst
