"""Perturbations of representations inside L2 / L-infinity balls.

PGD ascends the predictor's cross-entropy from a zero initialization and
keeps the best iterate, so the returned point never has lower attacker
objective than the start.  Random ball sampling draws uniformly from the
ball's volume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, predictor_xent_grad
from .numkit import Rng

__all__ = ["AttackSpec", "project", "pgd_attack", "random_ball"]


@dataclass(frozen=True)
class AttackSpec:
    p: str = "2"  # "2" or "inf"
    beta: float = 0.0
    steps: int = 10
    step_size: float | None = None  # default 2.5 * beta / steps
    seed: int = 0

    def __post_init__(self):
        if self.p not in ("2", "inf"):
            raise ValueError(f"norm order must be '2' or 'inf', got {self.p!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.step_size is not None and self.step_size <= 0 and self.steps > 0:
            raise ValueError("step_size must be positive")

    @property
    def effective_step(self) -> float:
        if self.step_size is not None:
            return self.step_size
        if self.steps == 0:
            return 0.0
        return 2.5 * self.beta / self.steps

    def to_dict(self) -> dict:
        return {"p": self.p, "beta": self.beta, "steps": self.steps,
                "step_size": self.step_size, "seed": self.seed}


def project(delta: np.ndarray, p: str, beta: float) -> np.ndarray:
    """Project each row of delta onto the p-ball of radius beta."""
    delta = np.atleast_2d(np.asarray(delta, dtype=float))
    if p == "inf":
        return np.clip(delta, -beta, beta)
    norms = np.linalg.norm(delta, axis=1, keepdims=True)
    scale = np.where(norms > beta, beta / np.maximum(norms, 1e-300), 1.0)
    return delta * scale


def pgd_attack(params: ModelParams, z0_batch: np.ndarray, y_batch: np.ndarray,
               spec: AttackSpec) -> np.ndarray:
    """Worst-case perturbed representation found by projected gradient ascent.

    Deterministic: initialization is zero.  Per-row best-loss iterates are
    retained, which makes the attacker objective monotone in step count at
    the returned point.
    """
    z0 = np.asarray(z0_batch, dtype=float)
    y = np.asarray(y_batch, dtype=int)
    if spec.beta == 0.0 or spec.steps == 0:
        return z0.copy()

    n = z0.shape[0]
    delta = np.zeros_like(z0)
    best_delta = delta.copy()
    best_loss = _per_row_xent(params, z0, y)
    step = spec.effective_step
    for _ in range(spec.steps):
        _, grad = predictor_xent_grad(params, z0 + delta, y)
        if not np.isfinite(grad).all():
            raise FloatingPointError("non-finite attack gradient")
        if spec.p == "inf":
            direction = np.sign(grad)
        else:
            norms = np.linalg.norm(grad, axis=1, keepdims=True)
            direction = grad / np.maximum(norms, 1e-300)
        delta = project(delta + step * direction, spec.p, spec.beta)
        loss = _per_row_xent(params, z0 + delta, y)
        improved = loss > best_loss
        best_delta[improved] = delta[improved]
        best_loss = np.maximum(best_loss, loss)
    return z0 + best_delta


def _per_row_xent(params: ModelParams, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    from .model import predict, softmax

    probs = softmax(predict(params, z))
    return -np.log(np.maximum(probs[np.arange(z.shape[0]), y], 1e-300))


def random_ball(z_batch: np.ndarray, p: str, beta: float, rng: Rng) -> np.ndarray:
    """Add an independent uniform draw from the p-ball to every row."""
    z = np.asarray(z_batch, dtype=float)
    if p not in ("2", "inf"):
        raise ValueError(f"norm order must be '2' or 'inf', got {p!r}")
    if beta == 0.0:
        return z.copy()
    n, d = z.shape
    if p == "inf":
        return z + rng.uniform(-beta, beta, size=(n, d))
    direction = rng.normal(size=(n, d))
    direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-300)
    radius = beta * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / d)
    return z + radius * direction
