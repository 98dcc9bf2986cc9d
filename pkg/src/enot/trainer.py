"""Stochastic ascent on the elastic-net OT dual ``E[phi(X)] - E[phi^c(Y)]``.

The parameter gradient of the c-transform term is taken at the frozen inner
maximizer (envelope theorem): ``d/dtheta phi^c(y) = grad_theta phi(y + delta*)``.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .cost import EnCost
from .ctransform import InnerConfig, solve_batch
from .potential import (
    NonFiniteError,
    PotentialNet,
    forward_batch,
    grad_params_batch,
    init_net,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    outer_iterations: int = 1000
    batch_size: int = 64
    step: float = 0.01
    momentum: float = 0.9
    inner: InnerConfig = field(default_factory=InnerConfig)
    seed: int = 0
    hidden_layers: int = 4
    hidden_width: int = 50
    skip_connections: bool = True
    # "sgd" (heavy-ball momentum) or "adam" (momentum is then beta1).
    optimizer: str = "sgd"
    # Multiply ``step`` by c2: keeps the update size matched to the 1/(2 c2)
    # curvature the dual has along the transport directions.
    scale_step_by_c2: bool = False
    # Zero the output layer at init so training starts from phi = const.
    zero_output_init: bool = False
    # Fraction of iterations during which only the affine part of the net
    # (input-to-output skip weights and output bias) is updated.
    affine_warmup: float = 0.0
    # "constant", or "hold_then_decay": constant for the first half, then
    # linearly down to zero over the second half.
    schedule: str = "constant"

    def __post_init__(self):
        if self.outer_iterations < 1 or self.batch_size < 1:
            raise ValueError("outer_iterations and batch_size must be positive")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if not 0 <= self.affine_warmup < 1:
            raise ValueError("affine_warmup must lie in [0, 1)")
        if self.schedule not in ("constant", "hold_then_decay"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    def effective_step(self, cost: EnCost, iteration: int = 0) -> float:
        lr = self.step * cost.c2 if self.scale_step_by_c2 else self.step
        if self.schedule == "hold_then_decay":
            half = self.outer_iterations // 2
            if iteration >= half:
                lr *= (self.outer_iterations - iteration) / (self.outer_iterations - half)
        return lr

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["inner"] = self.inner.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> TrainConfig:
        doc = dict(doc)
        inner = InnerConfig.from_dict(doc.pop("inner", {}))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown train config keys: {sorted(unknown)}")
        return cls(inner=inner, **doc)


@dataclass
class TrainLog:
    dual_estimate: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.dual_estimate)

    def append(self, dual: float, gnorm: float, secs: float) -> None:
        self.dual_estimate.append(dual)
        self.grad_norm.append(gnorm)
        self.seconds.append(secs)

    def window_mean(self, first: bool, frac: float = 0.1) -> float:
        k = max(1, int(round(frac * len(self))))
        vals = self.dual_estimate[:k] if first else self.dual_estimate[-k:]
        return float(np.mean(vals))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "dual_estimate", "grad_norm", "seconds"])
            for i, row in enumerate(zip(self.dual_estimate, self.grad_norm, self.seconds)):
                w.writerow([i, *(repr(float(v)) for v in row)])


def _check_pair(source, target) -> tuple[np.ndarray, np.ndarray]:
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.ndim != 2 or target.ndim != 2:
        raise ValueError("datasets must be 2-D arrays")
    if source.shape[1] != target.shape[1]:
        raise ValueError(f"dimension mismatch: source d={source.shape[1]}, target d={target.shape[1]}")
    if source.shape[0] == 0 or target.shape[0] == 0:
        raise ValueError("datasets must be nonempty")
    return source, target


def dual_objective_estimate(net: PotentialNet, source, target, cost: EnCost,
                            inner: InnerConfig = InnerConfig()) -> float:
    """Mean potential over ``source`` minus mean c-transform over ``target``."""
    source, target = _check_pair(source, target)
    ct, _ = solve_batch(net, target, cost, inner)
    return float(np.mean(forward_batch(net, source)) - np.mean(ct))


def dual_gradient(net: PotentialNet, xb: np.ndarray, yb: np.ndarray, cost: EnCost, inner: InnerConfig):
    """Batch dual estimate and its envelope gradient w.r.t. the flat parameters."""
    ct, deltas = solve_batch(net, yb, cost, inner)
    phix = forward_batch(net, xb)
    dual = float(np.mean(phix) - np.mean(ct))
    gx = grad_params_batch(net, xb, np.full(xb.shape[0], 1.0 / xb.shape[0])).flat()
    gy = grad_params_batch(net, yb + deltas, np.full(yb.shape[0], 1.0 / yb.shape[0])).flat()
    return dual, gx - gy


def affine_mask(net: PotentialNet) -> np.ndarray:
    """Boolean mask over the flat parameters selecting the affine-in-x part."""
    masks = [np.zeros(w.shape, dtype=bool) for w in net.weights]
    bmasks = [np.zeros(b.shape, dtype=bool) for b in net.biases]
    if net.hidden_layers == 0:
        masks[-1][...] = True
    elif net.skip_connections:
        masks[-1][0, net.hidden_width:] = True
    bmasks[-1][...] = True
    return np.concatenate([a.ravel() for w, b in zip(masks, bmasks) for a in (w, b)])


def train_potential(source, target, cost: EnCost, cfg: TrainConfig = TrainConfig(),
                    net: PotentialNet | None = None, callback=None) -> tuple[PotentialNet, TrainLog]:
    """Fit a potential by minibatch ascent on the dual.

    Batches are drawn with replacement; every target row gets a fresh inner
    solve from ``delta = 0``. ``callback(iteration, net, dual)`` is invoked after
    each update if given.
    """
    source, target = _check_pair(source, target)
    d = source.shape[1]
    rng = np.random.default_rng(cfg.seed)
    if net is None:
        net = init_net(d, cfg.hidden_layers, cfg.hidden_width, seed=cfg.seed,
                       skip_connections=cfg.skip_connections)
        if cfg.zero_output_init:
            net.weights[-1][...] = 0.0
            net.biases[-1][...] = 0.0
    else:
        net = net.copy()
    if net.input_dim != d:
        raise ValueError(f"net expects d={net.input_dim}, data has d={d}")

    theta = net.get_flat()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    beta2, eps = 0.999, 1e-8
    affine = affine_mask(net)
    warmup_iters = int(round(cfg.affine_warmup * cfg.outer_iterations))
    tlog = TrainLog()
    for it in range(cfg.outer_iterations):
        t0 = time.perf_counter()
        xb = source[rng.integers(0, source.shape[0], cfg.batch_size)]
        yb = target[rng.integers(0, target.shape[0], cfg.batch_size)]
        dual, g = dual_gradient(net, xb, yb, cost, cfg.inner)
        if not (np.isfinite(dual) and np.isfinite(g).all()):
            raise NonFiniteError(f"non-finite dual objective or gradient at iteration {it}")
        if it < warmup_iters:
            g = np.where(affine, g, 0.0)
        lr = cfg.effective_step(cost, it)
        if cfg.optimizer == "sgd":
            m = cfg.momentum * m + g
            theta = theta + lr * m
        else:
            m = cfg.momentum * m + (1 - cfg.momentum) * g
            v = beta2 * v + (1 - beta2) * g * g
            mhat = m / (1 - cfg.momentum ** (it + 1))
            vhat = v / (1 - beta2 ** (it + 1))
            theta = theta + lr * mhat / (np.sqrt(vhat) + eps)
        if not np.isfinite(theta).all():
            raise NonFiniteError(f"non-finite parameters after iteration {it}")
        net.set_flat(theta)
        tlog.append(dual, float(np.linalg.norm(g)), time.perf_counter() - t0)
        if callback is not None:
            callback(it, net, dual)
        if it % 100 == 0:
            log.debug("iter %d dual %.6g |g| %.3g", it, dual, tlog.grad_norm[-1])
    return net, tlog
