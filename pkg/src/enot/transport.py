"""Sparse transport maps, feature-selection masks and statistics from a potential.

The forward map is ``T(x) = x - ST_{c1/(2 c2)}(grad phi(x) / (2 c2))``, which
is computed as ``x - ST_{c1}(grad phi(x)) / (2 c2)``: the two agree
algebraically, and the second form is exactly zero precisely where
``|grad phi(x)_i| <= c1``, i.e. where the mask is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import EnCost, soft_threshold
from .ctransform import InnerConfig, solve_batch
from .potential import NonFiniteError, PotentialNet, grad_input_batch


def _grads(net: PotentialNet, xs: np.ndarray) -> np.ndarray:
    g = grad_input_batch(net, xs)
    if not np.isfinite(g).all():
        raise NonFiniteError("potential gradient is not finite")
    return g


def displacement_from_grad(grad, cost: EnCost) -> np.ndarray:
    return soft_threshold(grad, cost.c1) / (2.0 * cost.c2)


def mask_from_grad(grad, cost: EnCost) -> np.ndarray:
    return (np.abs(np.asarray(grad)) > cost.c1).astype(np.int8)


def transport_rows(net: PotentialNet, xs, cost: EnCost) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64).reshape(-1, net.input_dim)
    if xs.shape[0] == 0:
        return xs.copy()
    return xs - displacement_from_grad(_grads(net, xs), cost)


def transport_map(net: PotentialNet, x, cost: EnCost) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return transport_rows(net, x[None, :], cost)[0]


def feature_mask(net: PotentialNet, x, cost: EnCost) -> np.ndarray:
    """1 where ``|grad phi(x)_i| > c1`` (feature moved by the map), else 0."""
    x = np.asarray(x, dtype=np.float64)
    return mask_from_grad(_grads(net, x[None, :])[0], cost)


@dataclass
class TransportReport:
    source: np.ndarray
    transported: np.ndarray
    masks: np.ndarray
    grad_abs: np.ndarray  # |grad phi| per row, kept for saliency

    @property
    def sparsity(self) -> np.ndarray:
        return self.masks.sum(axis=1).astype(int)

    @property
    def displacement_l1(self) -> np.ndarray:
        return np.abs(self.source - self.transported).sum(axis=1)

    def summary(self) -> dict:
        n, d = self.masks.shape
        sp = self.sparsity
        return {
            "n": int(n),
            "d": int(d),
            "sparsity": sp.tolist(),
            "displacement_l1": self.displacement_l1.tolist(),
            "mean_sparsity": float(sp.mean()) if n else 0.0,
            "max_sparsity": int(sp.max()) if n else 0,
            "mean_displacement_l1": float(self.displacement_l1.mean()) if n else 0.0,
            "selection_frequency": (self.masks.mean(axis=0).tolist() if n else [0.0] * d),
        }


def transport_batch(net: PotentialNet, xs, cost: EnCost) -> TransportReport:
    xs = np.asarray(xs, dtype=np.float64).reshape(-1, net.input_dim)
    if xs.shape[0] == 0:
        z = np.zeros((0, net.input_dim))
        return TransportReport(z, z.copy(), np.zeros((0, net.input_dim), dtype=np.int8), z.copy())
    g = _grads(net, xs)
    moved = xs - displacement_from_grad(g, cost)
    return TransportReport(xs.copy(), moved, mask_from_grad(g, cost), np.abs(g))


def transport_via_ctransform(net: PotentialNet, ys, cost: EnCost, inner: InnerConfig = InnerConfig()) -> np.ndarray:
    """Backward map ``y -> y + delta*(y)`` given by the inner maximizer (diagnostic)."""
    ys = np.asarray(ys, dtype=np.float64).reshape(-1, net.input_dim)
    _, deltas = solve_batch(net, ys, cost, inner)
    return ys + deltas


@dataclass(frozen=True)
class SaliencyRow:
    feature: int
    frequency: float
    mean_abs_grad: float


def saliency_from_report(report: TransportReport) -> list[SaliencyRow]:
    if report.masks.shape[0] == 0:
        raise ValueError("saliency needs a nonempty dataset")
    freq = report.masks.mean(axis=0)
    mag = report.grad_abs.mean(axis=0)
    order = sorted(range(freq.size), key=lambda j: (-freq[j], -mag[j], j))
    return [SaliencyRow(j, float(freq[j]), float(mag[j])) for j in order]


def saliency_report(net: PotentialNet, xs, cost: EnCost) -> list[SaliencyRow]:
    """Features ranked by how often the map moves them, then by mean |grad phi|."""
    return saliency_from_report(transport_batch(net, xs, cost))


def denoising_ratio(report: TransportReport, noise_coords) -> float:
    """Fraction of (row, noise coordinate) pairs that the map leaves untouched."""
    idx = np.asarray(sorted(set(int(i) for i in noise_coords)), dtype=int)
    d = report.masks.shape[1]
    if idx.size and (idx.min() < 0 or idx.max() >= d):
        raise IndexError(f"noise coordinates out of range for d={d}")
    if idx.size == 0 or report.masks.shape[0] == 0:
        return 1.0
    return float(np.mean(report.masks[:, idx] == 0))
