"""Numerical elastic-net c-transform.

For a potential ``phi`` and target point ``y`` this solves

    phi^c(y) = max_delta  phi(y + delta) - c2 ||delta||^2 - c1 ||delta||_1

by proximal-gradient ascent started at ``delta = 0``. The whole elastic-net
penalty goes through the prox, so iterates carry exact zeros. Each row keeps
its own step size: it starts at ``step / ||grad phi(y)||`` (normalized) or
``step``, doubles after an accepted move and halves after a rejected one.
Only moves that do not lower the objective are accepted, so the current
iterate is always the best one seen and the result never falls below
``phi(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cost import EnCost, elastic_prox_step
from .potential import NonFiniteError, PotentialNet, value_and_grad_batch

_MAX_STEP = 1e12
_MIN_STEP = 1e-300


@dataclass(frozen=True)
class InnerConfig:
    iterations: int = 100
    step: float = 1.0
    normalize_gradient: bool = True
    # Optional L2 bound on the displacement (a local c-transform). None = unbounded.
    max_radius: float | None = None

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise ValueError("inner iterations must be >= 1")
        if not float(self.step) > 0:
            raise ValueError("inner step must be positive")
        if self.max_radius is not None and not self.max_radius > 0:
            raise ValueError("max_radius must be positive")

    def to_dict(self) -> dict:
        return {"iterations": self.iterations, "step": self.step,
                "normalize_gradient": self.normalize_gradient, "max_radius": self.max_radius}

    @classmethod
    def from_dict(cls, doc: dict) -> InnerConfig:
        radius = doc.get("max_radius")
        return cls(int(doc.get("iterations", 100)), float(doc.get("step", 1.0)),
                   bool(doc.get("normalize_gradient", True)),
                   None if radius is None else float(radius))


@dataclass
class CtResult:
    value: float
    delta: np.ndarray
    trace: list[float] | None = field(default=None, repr=False)


def solve_batch(
    net: PotentialNet,
    ys,
    cost: EnCost,
    cfg: InnerConfig = InnerConfig(),
    delta0=None,
    with_trace: bool = False,
):
    """Vectorized inner solve over the rows of ``ys``.

    Returns ``(values, deltas)`` and, if ``with_trace``, a third array of shape
    ``(iterations + 1, n)`` with the objective after every iteration.
    ``delta0`` overrides the zero start (used for grid-seeded refinement).
    """
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim != 2 or ys.shape[1] != net.input_dim:
        raise ValueError(f"expected targets of width {net.input_dim}, got shape {ys.shape}")
    n, d = ys.shape
    if n == 0:
        empty = (np.zeros(0), np.zeros((0, d)))
        return empty + (np.zeros((cfg.iterations + 1, 0)),) if with_trace else empty

    delta = np.zeros((n, d)) if delta0 is None else np.array(delta0, dtype=np.float64)
    val, grad = value_and_grad_batch(net, ys + delta)
    if not np.isfinite(val).all() or not np.isfinite(grad).all():
        raise NonFiniteError("potential is not finite at the target points")
    obj = val - cost.penalty(delta)

    if cfg.normalize_gradient:
        gnorm = np.linalg.norm(grad, axis=1)
        step = np.where(gnorm > 0, cfg.step / np.where(gnorm > 0, gnorm, 1.0), cfg.step)
    else:
        step = np.full(n, float(cfg.step))
    step = np.clip(step, _MIN_STEP, _MAX_STEP)

    trace = [obj.copy()] if with_trace else None
    for _ in range(cfg.iterations):
        cand = elastic_prox_step(delta, grad, step[:, None], cost)
        if cfg.max_radius is not None:
            # Radial shrink keeps exact zeros.
            norm = np.linalg.norm(cand, axis=1)
            over = norm > cfg.max_radius
            cand[over] *= (cfg.max_radius / norm[over])[:, None]
        cval, cgrad = value_and_grad_batch(net, ys + cand)
        if not np.isfinite(cval).all() or not np.isfinite(cgrad).all():
            raise NonFiniteError("potential diverged during the c-transform solve")
        cobj = cval - cost.penalty(cand)
        ok = cobj >= obj
        delta[ok] = cand[ok]
        grad[ok] = cgrad[ok]
        obj[ok] = cobj[ok]
        step = np.clip(np.where(ok, 2.0 * step, 0.5 * step), _MIN_STEP, _MAX_STEP)
        if with_trace:
            trace.append(obj.copy())
    if with_trace:
        return obj, delta, np.array(trace)
    return obj, delta


def c_transform(net: PotentialNet, y, cost: EnCost, cfg: InnerConfig = InnerConfig(),
                with_trace: bool = False) -> CtResult:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError(f"expected a vector, got shape {y.shape}")
    out = solve_batch(net, y[None, :], cost, cfg, with_trace=with_trace)
    trace = out[2][:, 0].tolist() if with_trace else None
    return CtResult(float(out[0][0]), out[1][0], trace)


def c_transform_batch(net: PotentialNet, ys, cost: EnCost, cfg: InnerConfig = InnerConfig()) -> list[CtResult]:
    ys = np.asarray(ys, dtype=np.float64).reshape(-1, net.input_dim)
    values, deltas = solve_batch(net, ys, cost, cfg)
    return [CtResult(float(v), dl) for v, dl in zip(values, deltas)]
