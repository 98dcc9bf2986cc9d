"""Elastic-net ground cost, soft-thresholding and the proximal steps built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnCost:
    """``c2 * ||x - y||_2^2 + c1 * ||x - y||_1``.

    ``c2`` is the quadratic coefficient, ``c1`` the L1 coefficient. The
    equivalent ``(lam, alpha)`` form has ``c2 = lam * (1 - alpha)`` and
    ``c1 = lam * alpha``.
    """

    c2: float
    c1: float

    def __post_init__(self):
        c2, c1 = float(self.c2), float(self.c1)
        if not (np.isfinite(c2) and np.isfinite(c1)):
            raise ValueError("cost coefficients must be finite")
        if c1 < 0:
            raise ValueError(f"c1 must be nonnegative, got {c1}")
        if c2 <= 0:
            # alpha == 1: the transport map divides by 2 * c2.
            raise ValueError(f"c2 must be positive, got {c2}")
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "c1", c1)

    @classmethod
    def from_lambda_alpha(cls, lam: float, alpha: float) -> EnCost:
        if lam <= 0 or not 0 <= alpha < 1:
            raise ValueError(f"need lam > 0 and 0 <= alpha < 1, got lam={lam}, alpha={alpha}")
        return cls(c2=lam * (1.0 - alpha), c1=lam * alpha)

    @property
    def lam(self) -> float:
        return self.c1 + self.c2

    @property
    def alpha(self) -> float:
        return self.c1 / (self.c1 + self.c2)

    def to_dict(self) -> dict:
        return {"c2": self.c2, "c1": self.c1}

    @classmethod
    def from_dict(cls, doc: dict) -> EnCost:
        return cls(c2=doc["c2"], c1=doc["c1"])

    def penalty(self, delta) -> np.ndarray:
        """Cost of a displacement; rowwise for 2-D input."""
        delta = np.asarray(delta, dtype=np.float64)
        return self.c2 * np.sum(delta * delta, axis=-1) + self.c1 * np.sum(np.abs(delta), axis=-1)


def en_cost(x, y, cost: EnCost) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(cost.penalty(x - y))


def pairwise_cost(xs, ys, cost: EnCost) -> np.ndarray:
    """Matrix ``C[i, j] = en_cost(xs[i], ys[j])``."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 2 or ys.ndim != 2 or xs.shape[1] != ys.shape[1]:
        raise ValueError(f"dimension mismatch: {xs.shape} vs {ys.shape}")
    diff = xs[:, None, :] - ys[None, :, :]
    return cost.c2 * np.sum(diff * diff, axis=-1) + cost.c1 * np.sum(np.abs(diff), axis=-1)


def soft_threshold(z, gamma):
    """Coordinatewise shrinkage toward zero; exactly 0 on the closed band |z| <= gamma."""
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(gamma < 0):
        raise ValueError("soft-threshold level must be nonnegative")
    z = np.asarray(z, dtype=np.float64)
    return np.where(np.abs(z) <= gamma, 0.0, z - np.sign(z) * gamma)


def prox_step(delta, ascent_dir, step, cost: EnCost) -> np.ndarray:
    """One ISTA ascent step: ``ST_{step*c1}(delta + step*ascent_dir)``.

    Only the L1 part is proximal here; any quadratic term must already be in
    ``ascent_dir``. ``step`` may be a scalar or a per-row column for batches.
    """
    delta = np.asarray(delta, dtype=np.float64)
    ascent_dir = np.asarray(ascent_dir, dtype=np.float64)
    if delta.shape != ascent_dir.shape:
        raise ValueError(f"dimension mismatch: {delta.shape} vs {ascent_dir.shape}")
    step = np.asarray(step, dtype=np.float64)
    if np.any(step <= 0):
        raise ValueError("step must be positive")
    return soft_threshold(delta + step * ascent_dir, step * cost.c1)


def elastic_prox_step(delta, grad, step, cost: EnCost) -> np.ndarray:
    """Ascent step with the whole elastic-net penalty handled proximally.

    Maximizes ``grad.(u - delta) - ||u - delta||^2 / (2 step) - c2||u||^2 - c1||u||_1``
    over ``u``, whose solution is ``ST_{step*c1}(delta + step*grad) / (1 + 2 step c2)``.
    """
    step = np.asarray(step, dtype=np.float64)
    return prox_step(delta, grad, step, cost) / (1.0 + 2.0 * step * cost.c2)
