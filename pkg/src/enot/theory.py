"""Dense-grid c-transforms in one and two dimensions and a weak-concavity checker.

For any grid function ``psi`` the infimal transform

    phi(x) = min_y  psi(y) + c2 ||x - y||^2 + c1 ||x - y||_1

satisfies, for all x, y and g in [0, 1],

    phi(g x + (1-g) y) >= g phi(x) + (1-g) phi(y) - c2 g (1-g) ||x-y||^2 - c1 ||x-y||_1.

The checker samples node pairs and a mixing weight, snaps the mixed point to
the nearest node and allows a slack of ``L * ||z - snap(z)||`` where
``L = 2 c2 diam + c1 sqrt(d)`` bounds the Lipschitz constant of ``phi`` on the
grid box (each ``x -> c(x, y)`` with ``y`` in the box has gradient norm at most
that).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import EnCost

MIN_RESOLUTION = 16
SLACK_FORMULA = "L * ||z - snap(z)||_2 with L = 2*c2*diam + c1*sqrt(d)"


@dataclass
class GridFunction:
    """Values on a uniform tensor grid; ``values.shape == (len(ax) for ax in axes)``."""

    lower: tuple
    upper: tuple
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        self.lower = tuple(float(v) for v in np.ravel(self.lower))
        self.upper = tuple(float(v) for v in np.ravel(self.upper))
        self.values = np.asarray(self.values, dtype=np.float64)
        d = len(self.lower)
        if d not in (1, 2) or len(self.upper) != d:
            raise ValueError(f"grid functions support d in {{1, 2}}, got bounds of length {d}")
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("upper bounds must exceed lower bounds")
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if self.values.shape != (self.resolution,) * d:
            raise ValueError(f"values shape {self.values.shape} does not match grid {(self.resolution,) * d}")
        if np.isnan(self.values).any() or (self.values == -np.inf).any():
            raise ValueError("grid values must be finite or +inf")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, self.resolution) for lo, hi in zip(self.lower, self.upper)]

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / (self.resolution - 1)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(np.array(self.upper) - np.array(self.lower)))

    def nodes(self) -> np.ndarray:
        """All nodes as rows, in C order of ``values``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def snap_index(self, pts) -> np.ndarray:
        """Flat index of the nearest node to each row of ``pts``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        idx = np.rint((pts - np.array(self.lower)) / self.spacing).astype(int)
        idx = np.clip(idx, 0, self.resolution - 1)
        return np.ravel_multi_index(tuple(idx.T), self.values.shape)

    def spec(self) -> dict:
        return {"dim": self.dim, "lower": list(self.lower), "upper": list(self.upper),
                "resolution": self.resolution}

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.lower, self.upper, self.resolution, np.asarray(values).reshape(self.values.shape))


def make_grid(d: int, resolution: int, lower=-1.0, upper=1.0, values=None) -> GridFunction:
    lo = np.broadcast_to(np.asarray(lower, dtype=np.float64), (d,))
    hi = np.broadcast_to(np.asarray(upper, dtype=np.float64), (d,))
    vals = np.zeros((resolution,) * d) if values is None else values
    return GridFunction(tuple(lo), tuple(hi), resolution, vals)


def _pairwise_cost_chunks(nodes: np.ndarray, cost: EnCost, chunk: int = 512):
    for start in range(0, nodes.shape[0], chunk):
        diff = nodes[start:start + chunk, None, :] - nodes[None, :, :]
        yield start, cost.c2 * np.sum(diff * diff, axis=-1) + cost.c1 * np.sum(np.abs(diff), axis=-1)


def _check_transform_input(psi: GridFunction) -> None:
    if psi.dim not in (1, 2):
        raise ValueError(f"unsupported dimension {psi.dim}")
    if psi.resolution < MIN_RESOLUTION:
        raise ValueError(f"resolution must be >= {MIN_RESOLUTION}, got {psi.resolution}")


def grid_c_transform(psi: GridFunction, cost: EnCost) -> GridFunction:
    """Exact ``min_y psi(y) + c(x, y)`` over the grid nodes, at every node ``x``."""
    _check_transform_input(psi)
    nodes = psi.nodes()
    flat = psi.values.ravel()
    out = np.empty(flat.size)
    for start, C in _pairwise_cost_chunks(nodes, cost):
        out[start:start + C.shape[0]] = np.min(flat[None, :] + C, axis=1)
    if not np.isfinite(out).all():
        raise ValueError("psi must be finite at one node at least")
    return psi.with_values(out)


def grid_sup_transform(phi: GridFunction, cost: EnCost) -> GridFunction:
    """Conjugate direction: ``max_x phi(x) - c(x, y)`` at every node ``y``."""
    _check_transform_input(phi)
    if not np.isfinite(phi.values).all():
        raise ValueError("phi must be finite")
    nodes = phi.nodes()
    flat = phi.values.ravel()
    out = np.empty(flat.size)
    for start, C in _pairwise_cost_chunks(nodes, cost):
        out[start:start + C.shape[0]] = np.max(flat[None, :] - C, axis=1)
    return phi.with_values(out)


def rough_psi(d: int, resolution: int, seed=0, lower=-1.0, upper=1.0, scale: float = 1.0) -> GridFunction:
    """White noise plus a random walk: rough, non-concave test input."""
    rng = np.random.default_rng(seed)
    shape = (resolution,) * d
    walk = np.cumsum(rng.standard_normal(shape), axis=0) / np.sqrt(resolution)
    if d == 2:
        walk = walk + np.cumsum(rng.standard_normal(shape), axis=1) / np.sqrt(resolution)
    return make_grid(d, resolution, lower, upper, scale * (walk + rng.standard_normal(shape)))


def lipschitz_bound(grid: GridFunction, cost: EnCost) -> float:
    return 2.0 * cost.c2 * grid.diameter + cost.c1 * np.sqrt(grid.dim)


@dataclass
class ConcavityReport:
    trials: int
    violations: int
    worst_slack: float  # min over trials of lhs - rhs, before the discretization allowance
    max_allowance: float
    lipschitz: float
    grid_spec: dict

    def to_dict(self) -> dict:
        return {"trials": self.trials, "violations": self.violations, "worst_slack": self.worst_slack,
                "max_allowance": self.max_allowance, "lipschitz": self.lipschitz,
                "slack_formula": SLACK_FORMULA, "grid_spec": self.grid_spec}


def weak_concavity_check(phi: GridFunction, cost: EnCost, trials: int = 1000, seed=0,
                         tol: float = 1e-9) -> ConcavityReport:
    """Sample node pairs and weights and count weak-concavity violations."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    nodes = phi.nodes()
    flat = phi.values.ravel()
    i = rng.integers(0, nodes.shape[0], trials)
    j = rng.integers(0, nodes.shape[0], trials)
    g = rng.random(trials)
    x, y = nodes[i], nodes[j]
    z = g[:, None] * x + (1 - g)[:, None] * y
    k = phi.snap_index(z)
    L = lipschitz_bound(phi, cost)
    allowance = L * np.linalg.norm(z - nodes[k], axis=1)
    diff = x - y
    rhs = (g * flat[i] + (1 - g) * flat[j]
           - cost.c2 * g * (1 - g) * np.sum(diff * diff, axis=1)
           - cost.c1 * np.sum(np.abs(diff), axis=1))
    margin = flat[k] - rhs
    scale = tol * (1.0 + np.abs(flat).max())
    violations = int(np.sum(margin < -(allowance + scale)))
    return ConcavityReport(trials, violations, float(margin.min()), float(allowance.max()), float(L), phi.spec())
