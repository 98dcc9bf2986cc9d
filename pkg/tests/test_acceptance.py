"""The ten end-to-end acceptance criteria, each at its stated tolerance and budget.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary (see conftest.py) and when this file is run as a script.
"""

import time

import numpy as np
import pytest

from enot.cost import EnCost, soft_threshold
from enot.ctransform import InnerConfig, c_transform
from enot.gmm import BENCHMARK_TRAIN, gmm_data, padded_pair, run_cell, split_halves
from enot.oracle import (
    assignment_cost,
    brute_force_assignment,
    hungarian,
    translation_experiment,
    weak_duality_check,
)
from enot.potential import affine_net, init_net
from enot.theory import grid_c_transform, rough_psi, weak_concavity_check
from enot.trainer import TrainConfig, train_potential
from enot.transport import denoising_ratio, feature_mask, transport_batch, transport_map

from gradcheck import max_rel_err

RESULTS = {}


def record(num, name, ok, detail, seconds, budget):
    within = seconds <= budget
    status = "PASS" if ok and within else "FAIL"
    RESULTS[num] = f"[{status}] criterion {num:2d} {name}: {detail}; {seconds:.1f}s (budget {budget:.0f}s)"
    print(RESULTS[num])
    assert ok, RESULTS[num]
    assert within, RESULTS[num]


def test_01_gradient_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    depths = [4, 12, 22]
    worst = 0.0
    for k in range(100):
        d = int(rng.integers(1, 11))
        net = init_net(d, depths[k % 3], 50, seed=int(rng.integers(2**31)))
        worst = max(worst, max_rel_err(net, rng.normal(size=d)))
    record(1, "gradient correctness", worst < 1e-4, f"worst relative error {worst:.2e} over 100 nets (< 1e-4)",
           time.perf_counter() - t0, 60)


def test_02_ctransform_closed_form():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_delta = worst_value = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 11))
        a, b = rng.uniform(-3, 3, d), rng.normal()
        cost = EnCost(rng.uniform(0.1, 2.0), rng.uniform(0.0, 1.5))
        y = rng.normal(size=d) * 3
        r = c_transform(affine_net(a, b), y, cost, InnerConfig(iterations=100))
        s = soft_threshold(a, cost.c1)
        worst_delta = max(worst_delta, float(np.abs(r.delta - s / (2 * cost.c2)).max()))
        worst_value = max(worst_value, abs(r.value - (a @ y + b + s @ s / (4 * cost.c2))))
    ok = worst_delta < 1e-6 and worst_value < 1e-6
    record(2, "c-transform closed form", ok,
           f"max |delta err| {worst_delta:.1e}, max |value err| {worst_value:.1e} (< 1e-6)",
           time.perf_counter() - t0, 60)


def test_03_weak_duality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    cost = EnCost(0.5, 0.1)
    xs = rng.normal(size=(8, 2))
    ys = rng.normal(size=(8, 2)) + np.array([1.0, -0.5])
    holds, worst_gap = 0, np.inf
    for k in range(100):
        net = init_net(2, int(rng.integers(1, 5)), 50, seed=k)
        net.weights[-1] *= 10 ** rng.uniform(-1, 1)  # vary the potential's scale
        rep = weak_duality_check(net, xs, ys, cost, InnerConfig(), verify_grid=True, tol=1e-6)
        holds += rep.holds
        worst_gap = min(worst_gap, rep.gap)
    record(3, "weak duality", holds == 100, f"{holds}/100 hold, smallest primal-dual gap {worst_gap:.3g}",
           time.perf_counter() - t0, 300)


@pytest.mark.slow
def test_04_translation_oracle():
    t0 = time.perf_counter()
    rep = translation_experiment(EnCost(1e-6, 1e-2), d=10, shift=-20.0, seed=1)
    assert rep.analytic_cost == pytest.approx(0.2004, rel=1e-12)
    ok = rep.relative_gap <= 0.10 and rep.mean_map_error <= 0.5
    record(4, "translation oracle", ok,
           f"relative dual gap {rep.relative_gap:.4f} (<= 0.10), mean map error {rep.mean_map_error:.3f} (<= 0.5)",
           time.perf_counter() - t0, 600)


@pytest.mark.slow
def test_05_nll_trend():
    t0 = time.perf_counter()
    passes, parts = 0, []
    for seed in (1, 2, 3):
        data = gmm_data(100, 2000, seed)
        nll = {}
        for k, c1 in enumerate((0.0, 5e-2)):
            cfg = TrainConfig.from_dict({**BENCHMARK_TRAIN.to_dict(), "seed": 10 * seed + k, "hidden_layers": 22})
            nll[c1] = run_cell(data, 22, EnCost(1e-6, c1), cfg)["test_nll"]
        ok = nll[5e-2] * 5 <= nll[0.0]
        passes += ok
        parts.append(f"seed {seed}: {nll[0.0]:.3g} vs {nll[5e-2]:.3g}")
    record(5, "GMM NLL trend (d=100, depth 22)", passes >= 2,
           f"{passes}/3 seeds with NLL(5e-2) <= NLL(0)/5 [{'; '.join(parts)}]", time.perf_counter() - t0, 1800)


def test_06_mask_map_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    exceptions = 0
    draws = 0
    for k in range(100):
        d = int(rng.integers(1, 9))
        net = init_net(d, int(rng.integers(0, 5)), int(rng.integers(1, 20)), seed=k,
                       skip_connections=bool(rng.integers(2)))
        for _ in range(100):
            x = rng.normal(size=d) * 10 ** rng.uniform(-2, 2)
            cost = EnCost(10 ** rng.uniform(-6, 1), rng.uniform(0, 0.5))
            mask = feature_mask(net, x, cost)
            moved = transport_map(net, x, cost)
            exceptions += int(np.sum((mask == 0) != (moved == x)))
            draws += 1
    record(6, "mask/map exactness", exceptions == 0 and draws == 10_000,
           f"{exceptions} exceptions over {draws} draws", time.perf_counter() - t0, 60)


def test_07_sparsity_monotone():
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    exceptions = 0
    c1s = np.linspace(0.0, 0.6, 10)
    for k in range(100):
        d = int(rng.integers(2, 12))
        net = init_net(d, int(rng.integers(1, 5)), 20, seed=k)
        x = rng.normal(size=(1, d))
        counts = [int(transport_batch(net, x, EnCost(0.1, c1)).sparsity[0]) for c1 in c1s]
        exceptions += sum(b > a for a, b in zip(counts, counts[1:]))
    record(7, "sparsity monotone in c1", exceptions == 0, f"{exceptions} exceptions over 100 pairs x 10 values",
           time.perf_counter() - t0, 60)


DENOISE_C1 = (0.0, 5e-3, 5e-2)


@pytest.mark.slow
def test_08_denoising_trend():
    t0 = time.perf_counter()
    passes, parts = 0, []
    for seed in (1, 2, 3):
        src, tgt, noise = padded_pair(10, 10, seed=seed)
        ss = np.random.SeedSequence(seed).spawn(2)
        src_tr, src_te = split_halves(src, ss[0])
        tgt_tr, _ = split_halves(tgt, ss[1])
        ratios = []
        for c1 in DENOISE_C1:
            cost = EnCost(1e-6, c1)
            cfg = TrainConfig.from_dict({**BENCHMARK_TRAIN.to_dict(), "seed": seed, "hidden_layers": 4})
            net, _ = train_potential(src_tr, tgt_tr, cost, cfg)
            ratios.append(denoising_ratio(transport_batch(net, src_te, cost), noise))
        ok = ratios[-1] >= 0.8 and all(b >= a for a, b in zip(ratios, ratios[1:]))
        passes += ok
        parts.append(f"seed {seed}: " + "/".join(f"{r:.3f}" for r in ratios))
    record(8, "denoising-ratio trend", passes >= 2,
           f"{passes}/3 seeds monotone with final ratio >= 0.8 at c1={DENOISE_C1} [{'; '.join(parts)}]",
           time.perf_counter() - t0, 1200)


def test_09_weak_concavity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    total = 0
    for d, res in ((1, 256), (2, 64)):
        for k in range(10):
            cost = EnCost(rng.uniform(0.05, 3.0), rng.uniform(0.0, 2.0))
            psi = rough_psi(d, res, seed=int(rng.integers(2**31)), scale=rng.uniform(0.1, 5.0))
            rep = weak_concavity_check(grid_c_transform(psi, cost), cost, trials=1000, seed=k)
            total += rep.violations
    record(9, "weak concavity of grid c-transforms", total == 0,
           f"{total} violations over 20 grids x 1000 triples", time.perf_counter() - t0, 300)


def test_10_matching_equals_brute_force():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1010)
    mismatches = 0
    for _ in range(50):
        C = rng.normal(size=(6, 6)) ** 2
        mismatches += assignment_cost(C, hungarian(C)) != assignment_cost(C, brute_force_assignment(C))
    record(10, "matching equals brute force", mismatches == 0, f"{mismatches} mismatches over 50 instances",
           time.perf_counter() - t0, 60)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
