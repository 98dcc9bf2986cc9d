"""Bimodal Gaussian mixtures, transported-sample NLL and the coefficient benchmark."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp

from .cost import EnCost
from .ctransform import InnerConfig
from .trainer import TrainConfig, train_potential
from .transport import transport_batch

log = logging.getLogger(__name__)

GAMMA = 10.0
EPS_10 = 2.0

RESULT_COLUMNS = ["dim", "depth", "c1", "c2", "seed", "train_nll", "test_nll", "mean_sparsity", "error"]


@dataclass(frozen=True)
class GmmSpec:
    """Mixture ``weight * N(mu, sigma^2 I) + (1 - weight) * N(-mu, sigma^2 I)``."""

    mu: tuple
    sigma: float = 1.0
    weight: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(m) for m in np.ravel(self.mu)))
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must lie in [0, 1], got {self.weight}")

    @property
    def dim(self) -> int:
        return len(self.mu)

    @property
    def mean(self) -> np.ndarray:
        return (2.0 * self.weight - 1.0) * np.asarray(self.mu)

    def to_dict(self) -> dict:
        return {"mu": list(self.mu), "sigma": self.sigma, "weight": self.weight}

    @classmethod
    def from_dict(cls, doc: dict) -> GmmSpec:
        return cls(tuple(doc["mu"]), float(doc.get("sigma", 1.0)), float(doc.get("weight", 0.5)))


def paper_gmm_pair(d: int) -> tuple[GmmSpec, GmmSpec]:
    """Source and target mixtures whose means differ only in the sign of coordinate 0."""
    if int(d) != d or d < 2:
        raise ValueError(f"need an integer d >= 2, got {d}")
    d = int(d)
    eps = EPS_10 / np.sqrt(d / 10.0)
    tail = [eps] * (d - 1)
    return GmmSpec(tuple([GAMMA] + tail)), GmmSpec(tuple([-GAMMA] + tail))


def sample_gmm(spec: GmmSpec, n: int, seed=0) -> np.ndarray:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    sign = np.where(rng.random(n) < spec.weight, 1.0, -1.0)
    return sign[:, None] * np.asarray(spec.mu) + spec.sigma * rng.standard_normal((n, spec.dim))


def gmm_log_density(spec: GmmSpec, samples) -> np.ndarray:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != spec.dim:
        raise ValueError(f"samples have d={x.shape[1]}, spec has d={spec.dim}")
    if not np.isfinite(x).all():
        raise ValueError("samples contain non-finite values")
    mu = np.asarray(spec.mu)
    s2 = spec.sigma ** 2
    norm = -0.5 * spec.dim * np.log(2.0 * np.pi * s2)
    quad = np.stack([np.sum((x - mu) ** 2, axis=1), np.sum((x + mu) ** 2, axis=1)], axis=1)
    logw = np.log(np.array([spec.weight, 1.0 - spec.weight]))  # log 0 = -inf is fine here
    with np.errstate(divide="ignore"):
        return logsumexp(logw - 0.5 * quad / s2, axis=1) + norm


def gmm_nll(spec: GmmSpec, samples) -> float:
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("NLL needs at least one sample")
    return float(-np.mean(gmm_log_density(spec, x)))


def split_halves(data: np.ndarray, seed) -> tuple[np.ndarray, np.ndarray]:
    """First and second half of a seeded shuffle."""
    perm = np.random.default_rng(seed).permutation(data.shape[0])
    half = data.shape[0] // 2
    return data[perm[:half]], data[perm[half:]]


def padded_pair(d_signal: int, d_noise: int, seed=0, n: int = 2000):
    """GMM pair in the first ``d_signal`` coordinates plus uniform[0,1] noise columns.

    Returns ``(source, target, noise_indices)``.
    """
    if d_signal < 2 or d_noise < 0:
        raise ValueError("need d_signal >= 2 and d_noise >= 0")
    ss = np.random.SeedSequence(seed).spawn(4)
    src_spec, tgt_spec = paper_gmm_pair(d_signal)
    src = sample_gmm(src_spec, n, ss[0])
    tgt = sample_gmm(tgt_spec, n, ss[1])
    if d_noise:
        src = np.hstack([src, np.random.default_rng(ss[2]).random((n, d_noise))])
        tgt = np.hstack([tgt, np.random.default_rng(ss[3]).random((n, d_noise))])
    return src, tgt, list(range(d_signal, d_signal + d_noise))


# Benchmark --------------------------------------------------------------------

# Heavy-ball SGD with a step 100x below 0.01 (which diverges at
# c2 = 1e-6), decayed over the second half. The inner search is bounded by the
# reach of 100 unit-length normalized steps.
BENCHMARK_TRAIN = TrainConfig(outer_iterations=1000, batch_size=64, step=1e-4, momentum=0.9,
                              zero_output_init=True, schedule="hold_then_decay",
                              inner=InnerConfig(max_radius=100.0))


@dataclass
class BenchmarkGrid:
    dims: list = field(default_factory=lambda: [10, 100, 1000])
    l1_coefficients: list = field(default_factory=lambda: [0.0, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1])
    hidden_layer_counts: list = field(default_factory=lambda: [22, 12, 4])
    c2: float = 1e-6
    n_samples: int = 2000
    seed: int = 0
    train: TrainConfig = BENCHMARK_TRAIN
    include_large: bool = False  # d > 100 cells run only when set

    def __post_init__(self):
        if not (self.dims and self.l1_coefficients and self.hidden_layer_counts):
            raise ValueError("benchmark grid lists must be nonempty")
        if self.n_samples < 2 or self.n_samples % 2:
            raise ValueError("n_samples must be even and >= 2")
        if not self.c2 > 0:
            raise ValueError("c2 must be positive")
        if any(c < 0 for c in self.l1_coefficients):
            raise ValueError("L1 coefficients must be nonnegative")

    def active_dims(self) -> list:
        return [d for d in self.dims if self.include_large or d <= 100]

    def cells(self) -> list[tuple[int, int, float]]:
        return [(d, h, c1) for d in self.active_dims() for h in self.hidden_layer_counts
                for c1 in self.l1_coefficients]

    def cell_seed(self, dim: int, depth: int, c1_index: int) -> int:
        return int(np.random.SeedSequence([self.seed, dim, depth, c1_index]).generate_state(1)[0])

    def data_seed(self, dim: int) -> int:
        # Shared across depths and coefficients so cells compare on the same samples.
        return int(np.random.SeedSequence([self.seed, dim]).generate_state(1)[0])

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["train"] = self.train.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> BenchmarkGrid:
        doc = dict(doc)
        train = TrainConfig.from_dict(doc.pop("train")) if "train" in doc else BENCHMARK_TRAIN
        return cls(train=train, **doc)


def gmm_data(dim: int, n_samples: int, seed) -> dict:
    """Sampled and split source/target sets for one dimension."""
    src_spec, tgt_spec = paper_gmm_pair(dim)
    ss = np.random.SeedSequence(seed).spawn(4)
    src_tr, src_te = split_halves(sample_gmm(src_spec, n_samples, ss[0]), ss[2])
    tgt_tr, tgt_te = split_halves(sample_gmm(tgt_spec, n_samples, ss[1]), ss[3])
    return {"source_spec": src_spec, "target_spec": tgt_spec, "source_train": src_tr,
            "source_test": src_te, "target_train": tgt_tr, "target_test": tgt_te}


def run_cell(data: dict, depth: int, cost: EnCost, cfg: TrainConfig) -> dict:
    net, _ = train_potential(data["source_train"], data["target_train"], cost, cfg)
    tr = transport_batch(net, data["source_train"], cost)
    te = transport_batch(net, data["source_test"], cost)
    return {"train_nll": gmm_nll(data["target_spec"], tr.transported),
            "test_nll": gmm_nll(data["target_spec"], te.transported),
            "mean_sparsity": float(te.sparsity.mean())}


def run_benchmark(grid: BenchmarkGrid, progress=None) -> list[dict]:
    """One result row per grid cell. Failing cells get NaN metrics and an error string."""
    rows = []
    for dim in grid.active_dims():
        data = gmm_data(dim, grid.n_samples, grid.data_seed(dim))
        for depth in grid.hidden_layer_counts:
            for k, c1 in enumerate(grid.l1_coefficients):
                seed = grid.cell_seed(dim, depth, k)
                row = {"dim": dim, "depth": depth, "c1": float(c1), "c2": float(grid.c2), "seed": seed,
                       "train_nll": float("nan"), "test_nll": float("nan"),
                       "mean_sparsity": float("nan"), "error": ""}
                t0 = time.perf_counter()
                try:
                    cfg = TrainConfig.from_dict({**grid.train.to_dict(), "seed": seed, "hidden_layers": depth})
                    row.update(run_cell(data, depth, EnCost(grid.c2, c1), cfg))
                except (ArithmeticError, ValueError, FloatingPointError) as exc:
                    row["error"] = f"{type(exc).__name__}: {exc}"
                    log.warning("cell d=%d depth=%d c1=%g failed: %s", dim, depth, c1, exc)
                log.info("cell d=%d depth=%d c1=%g done in %.1fs", dim, depth, c1, time.perf_counter() - t0)
                rows.append(row)
                if progress is not None:
                    progress(row)
    return rows


def write_results(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([r["dim"], r["depth"], repr(r["c1"]), repr(r["c2"]), r["seed"],
                        repr(r["train_nll"]), repr(r["test_nll"]), repr(r["mean_sparsity"]), r["error"]])


def write_manifest(grid: BenchmarkGrid, path, extra: dict | None = None) -> None:
    doc = {"grid": grid.to_dict(), "columns": RESULT_COLUMNS}
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
