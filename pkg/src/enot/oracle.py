"""Exact discrete OT on tiny uniform empirical measures, and checks built on it."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .cost import EnCost, pairwise_cost
from .ctransform import InnerConfig, solve_batch
from .potential import PotentialNet, forward_batch
from .trainer import TrainConfig, train_potential

BRUTE_FORCE_MAX = 8
DEFAULT_CAP = 10


@dataclass
class Coupling:
    assignment: np.ndarray  # assignment[i] = index of the target matched to source i
    cost: float  # mean matched cost


def assignment_cost(C: np.ndarray, assignment) -> float:
    """Mean of ``C[i, assignment[i]]`` summed in row order."""
    total = 0.0
    for i, j in enumerate(assignment):
        total += C[i, j]
    return total / len(assignment) if len(assignment) else 0.0


@functools.lru_cache(maxsize=BRUTE_FORCE_MAX + 1)
def _all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=int).reshape(-1, n)


def brute_force_assignment(C: np.ndarray) -> np.ndarray:
    """Exhaustive minimum over all n! assignments (first minimizer in lexicographic order)."""
    C = np.asarray(C, dtype=np.float64)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError(f"cost matrix must be square, got {C.shape}")
    if n > BRUTE_FORCE_MAX:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX}, got {n}")
    perms = _all_permutations(n)
    totals = C[np.arange(n), perms].sum(axis=1)
    return perms[int(np.argmin(totals))].copy()


def hungarian(C: np.ndarray) -> np.ndarray:
    """Minimum-cost perfect matching by shortest augmenting paths with potentials.

    O(n^3). Returns ``assignment`` with ``assignment[row] = column``.
    """
    C = np.asarray(C, dtype=np.float64)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError(f"cost matrix must be square, got {C.shape}")
    INF = np.inf
    # 1-based arrays; column 0 is a virtual root.
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match_col = np.zeros(n + 1, dtype=int)  # match_col[j] = row matched to column j
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        match_col[0] = i
        j0 = 0
        minv = np.full(n + 1, INF)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            delta, j1 = INF, 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = C[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta, j1 = minv[j], j
            for j in range(n + 1):
                if used[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while True:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
            if j0 == 0:
                break
    assignment = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        assignment[match_col[j] - 1] = j - 1
    return assignment


def primal_ot_discrete(xs, ys, cost: EnCost, cap: int = DEFAULT_CAP, use_matching: bool = False) -> Coupling:
    """Globally optimal coupling between two equal-size uniform empirical measures.

    By default sizes up to ``min(cap, BRUTE_FORCE_MAX)`` are enumerated
    exhaustively and larger ones are rejected. With ``use_matching`` the exact
    augmenting-path solver is used and the cap does not apply.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape[0] != ys.shape[0]:
        raise ValueError(f"sample counts differ: {xs.shape[0]} vs {ys.shape[0]}")
    n = xs.shape[0]
    C = pairwise_cost(xs, ys, cost)
    if n == 0:
        return Coupling(np.zeros(0, dtype=int), 0.0)
    if use_matching:
        perm = hungarian(C)
    elif n <= min(cap, BRUTE_FORCE_MAX):
        perm = brute_force_assignment(C)
    else:
        raise ValueError(f"n={n} exceeds the brute-force cap {min(cap, BRUTE_FORCE_MAX)}; enable use_matching")
    return Coupling(perm, assignment_cost(C, perm))


# Verified c-transform on tiny problems ---------------------------------------


def verified_c_transform(net: PotentialNet, ys, cost: EnCost, inner: InnerConfig,
                         candidates=None, resolution: int = 201, margin: float = 1.0):
    """c-transform values checked against a dense grid search (d <= 2).

    The value is the best of: the plain inner solve, every node of a uniform
    grid over the bounding box of ``ys`` and ``candidates`` (padded by
    ``margin``), every candidate point itself, and an inner solve restarted from
    the best grid node. A larger value is always a better lower bound on the
    true supremum, so this only tightens the estimate.
    """
    ys = np.asarray(ys, dtype=np.float64)
    n, d = ys.shape
    if d > 2:
        raise ValueError("grid verification supports d <= 2 only")
    pts = ys if candidates is None else np.vstack([ys, np.asarray(candidates, dtype=np.float64)])
    lo, hi = pts.min(axis=0) - margin, pts.max(axis=0) + margin
    axes = [np.linspace(lo[k], hi[k], resolution) for k in range(d)]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    if candidates is not None:
        grid = np.vstack([grid, np.asarray(candidates, dtype=np.float64)])
    gvals = forward_batch(net, grid)

    values, deltas = solve_batch(net, ys, cost, inner)
    best_grid_delta = np.empty_like(ys)
    for i in range(n):
        obj = gvals - cost.penalty(grid - ys[i])
        k = int(np.argmax(obj))
        best_grid_delta[i] = grid[k] - ys[i]
        if obj[k] > values[i]:
            values[i], deltas[i] = obj[k], best_grid_delta[i]
    rvals, rdeltas = solve_batch(net, ys, cost, inner, delta0=best_grid_delta)
    better = rvals > values
    values[better], deltas[better] = rvals[better], rdeltas[better]
    return values, deltas


@dataclass
class DualityReport:
    dual: float
    primal: float
    holds: bool

    @property
    def gap(self) -> float:
        return self.primal - self.dual

    def to_dict(self) -> dict:
        return {"dual": self.dual, "primal": self.primal, "gap": self.gap, "holds": self.holds}


def weak_duality_check(net: PotentialNet, xs, ys, cost: EnCost, inner: InnerConfig = InnerConfig(),
                       verify_grid: bool | None = None, tol: float = 1e-6) -> DualityReport:
    """Compare the dual estimate of ``net`` with the exact primal cost.

    In d <= 2 the c-transform is grid-verified by default so that inner-solver
    suboptimality cannot inflate the dual estimate.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    primal = primal_ot_discrete(xs, ys, cost, use_matching=xs.shape[0] > BRUTE_FORCE_MAX).cost
    if verify_grid is None:
        verify_grid = xs.shape[1] <= 2
    if verify_grid:
        ct, _ = verified_c_transform(net, ys, cost, inner, candidates=xs)
    else:
        ct, _ = solve_batch(net, ys, cost, inner)
    dual = float(np.mean(forward_batch(net, xs)) - np.mean(ct))
    return DualityReport(dual, primal, bool(dual <= primal + tol))


# Translation oracle -----------------------------------------------------------


def translation_cost(delta_mu, cost: EnCost) -> float:
    """OT cost between a measure and its translate by ``delta_mu``: ``h(delta_mu)``."""
    return float(cost.penalty(np.asarray(delta_mu, dtype=np.float64)))


@dataclass
class TranslationReport:
    analytic_cost: float
    dual_estimate: float
    relative_gap: float
    mean_map_error: float
    n_test: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def translation_oracle_check(net: PotentialNet, cost: EnCost, delta_mu, source_test, target_test,
                             inner: InnerConfig = InnerConfig()) -> TranslationReport:
    """Score a net trained between ``N(mu, I)`` and ``N(mu + delta_mu, I)``.

    Reports the relative dual gap against the analytic cost and the mean L2
    distance between the transported test points and ``x + delta_mu``.
    """
    from .transport import transport_rows

    delta_mu = np.asarray(delta_mu, dtype=np.float64)
    analytic = translation_cost(delta_mu, cost)
    xs = np.asarray(source_test, dtype=np.float64)
    ys = np.asarray(target_test, dtype=np.float64)
    ct, _ = solve_batch(net, ys, cost, inner)
    dual = float(np.mean(forward_batch(net, xs)) - np.mean(ct))
    rel = abs(dual - analytic) / analytic if analytic > 0 else abs(dual)
    moved = transport_rows(net, xs, cost)
    err = float(np.mean(np.linalg.norm(moved - (xs + delta_mu), axis=1)))
    return TranslationReport(analytic, dual, rel, err, xs.shape[0])



# Fits the affine part first, then lets the hidden layers refine it while the
# step decays. The step is scaled by c2 so updates match the dual's curvature.
TRANSLATION_TRAIN = TrainConfig(outer_iterations=1000, batch_size=64, step=1.0, momentum=0.9,
                                hidden_layers=4, hidden_width=50, scale_step_by_c2=True,
                                zero_output_init=True, affine_warmup=0.3, schedule="hold_then_decay")


def translation_experiment(cost: EnCost = EnCost(1e-6, 1e-2), d: int = 10, shift: float = -20.0,
                           n_train: int = 1000, n_test: int = 1000, seed=0,
                           cfg: TrainConfig = TRANSLATION_TRAIN) -> TranslationReport:
    """Train between ``N(mu, I)`` and ``N(mu + shift e_0, I)`` and score the result."""
    mu = np.array([10.0] + [2.0] * (d - 1))
    delta_mu = np.zeros(d)
    delta_mu[0] = shift
    rng = np.random.default_rng(seed)
    src = rng.standard_normal((n_train + n_test, d)) + mu
    tgt = rng.standard_normal((n_train + n_test, d)) + mu + delta_mu
    cfg = TrainConfig.from_dict({**cfg.to_dict(), "seed": seed})
    net, _ = train_potential(src[:n_train], tgt[:n_train], cost, cfg)
    return translation_oracle_check(net, cost, delta_mu, src[n_train:], tgt[n_train:], cfg.inner)
