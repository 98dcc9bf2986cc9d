import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ks_2samp, multivariate_normal

from enot.gmm import (
    BenchmarkGrid,
    GmmSpec,
    gmm_data,
    gmm_nll,
    padded_pair,
    paper_gmm_pair,
    run_benchmark,
    sample_gmm,
    split_halves,
    write_manifest,
    write_results,
)
from enot.trainer import TrainConfig

TINY_TRAIN = TrainConfig(outer_iterations=5, batch_size=8, hidden_width=6)


def test_paper_pair():
    src, tgt = paper_gmm_pair(10)
    assert src.mu == tuple([10.0] + [2.0] * 9)
    assert tgt.mu == tuple([-10.0] + [2.0] * 9)
    assert src.sigma == tgt.sigma == 1.0 and src.weight == tgt.weight == 0.5
    assert paper_gmm_pair(40)[0].mu[1] == pytest.approx(1.0, rel=1e-15)
    s, t = paper_gmm_pair(7)
    assert s.mu[0] == -t.mu[0] and s.mu[1:] == t.mu[1:]
    with pytest.raises(ValueError):
        paper_gmm_pair(1)


def test_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        GmmSpec((1.0,), sigma=0.0)
    with pytest.raises(ValueError):
        GmmSpec((1.0,), weight=1.5)
    spec = GmmSpec((1.0, -2.0), 0.5, 0.3)
    assert GmmSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


def test_sampling_reproducible_and_moments():
    spec = GmmSpec((3.0, -1.0, 0.5), 1.0, 0.7)
    a, b = sample_gmm(spec, 50, seed=4), sample_gmm(spec, 50, seed=4)
    np.testing.assert_array_equal(a, b)
    big = sample_gmm(spec, 100_000, seed=1)
    assert np.all(np.abs(big.mean(axis=0) - spec.mean) < 5 * np.sqrt(1 + np.square(spec.mu)) / np.sqrt(1e5))
    single = sample_gmm(GmmSpec((1.0, 2.0), 2.0, 1.0), 100_000, seed=2)
    np.testing.assert_allclose(np.cov(single.T), 4.0 * np.eye(2), atol=0.1)
    with pytest.raises(ValueError):
        sample_gmm(spec, 0)


def test_nll_closed_form_and_reference():
    assert gmm_nll(GmmSpec((0.0,)), np.zeros((1, 1))) == pytest.approx(0.5 * np.log(2 * np.pi), rel=1e-14)
    spec = GmmSpec((1.0, -0.5, 2.0), 1.3, 0.25)
    x = np.random.default_rng(0).normal(size=(20, 3)) * 2
    ref = 0.25 * multivariate_normal(spec.mu, 1.69).pdf(x) + 0.75 * multivariate_normal(-np.array(spec.mu), 1.69).pdf(x)
    assert gmm_nll(spec, x) == pytest.approx(-np.mean(np.log(ref)), rel=1e-12)


def test_nll_self_reference_value():
    # Monte Carlo self-NLL of the d=10 target against the exact mixture entropy bound.
    _, tgt = paper_gmm_pair(10)
    x = sample_gmm(tgt, 1000, seed=0)
    nll = gmm_nll(tgt, x)
    gaussian_entropy = 0.5 * 10 * np.log(2 * np.pi * np.e)
    assert gaussian_entropy - 0.5 < nll < gaussian_entropy + np.log(2) + 0.5


def test_nll_stable_far_away_and_monotone():
    spec, _ = paper_gmm_pair(10)
    x = sample_gmm(spec, 10, seed=0)
    vals = [gmm_nll(spec, x + shift) for shift in (0.0, 50.0, 1e3, 1e6)]
    assert np.all(np.isfinite(vals))
    assert all(b > a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        gmm_nll(spec, np.full((1, 10), np.nan))
    with pytest.raises(ValueError):
        gmm_nll(spec, np.zeros((0, 10)))


@given(st.integers(0, 2**31), st.integers(1, 6))
def test_nll_finite_property(seed, d):
    rng = np.random.default_rng(seed)
    spec = GmmSpec(tuple(rng.normal(size=d) * 100), rng.uniform(0.01, 10), rng.uniform(0, 1))
    assert np.isfinite(gmm_nll(spec, rng.normal(size=(5, d)) * 1e4))


def test_split_halves():
    data = np.arange(20.0).reshape(10, 2)
    a, b = split_halves(data, 3)
    assert a.shape == b.shape == (5, 2)
    assert sorted(np.vstack([a, b])[:, 0]) == list(data[:, 0])


def test_padded_pair():
    src, tgt, noise = padded_pair(10, 10, seed=0, n=10_000)
    assert src.shape == tgt.shape == (10_000, 20)
    assert noise == list(range(10, 20))
    assert 0 <= src[:, noise].min() and src[:, noise].max() <= 1
    crit = 1.63 * np.sqrt(2 / 10_000)  # 1% two-sample KS critical value
    for j in noise:
        assert ks_2samp(src[:, j], tgt[:, j]).statistic < crit
    s0, t0, n0 = padded_pair(4, 0, seed=1, n=50)
    assert s0.shape == (50, 4) and n0 == []


def test_grid_validation_and_cells():
    with pytest.raises(ValueError):
        BenchmarkGrid(dims=[])
    with pytest.raises(ValueError):
        BenchmarkGrid(n_samples=101)
    grid = BenchmarkGrid()
    assert grid.active_dims() == [10, 100]
    assert len(grid.cells()) == 2 * 3 * 7
    assert BenchmarkGrid(include_large=True).active_dims() == [10, 100, 1000]
    again = BenchmarkGrid.from_dict(json.loads(json.dumps(grid.to_dict())))
    assert again == grid


def test_single_cell_benchmark_and_reproducibility(tmp_path):
    grid = BenchmarkGrid(dims=[4], l1_coefficients=[0.05], hidden_layer_counts=[2], n_samples=40,
                         seed=5, train=TINY_TRAIN)
    rows = run_benchmark(grid)
    assert len(rows) == 1 and rows[0]["error"] == ""
    assert np.isfinite(rows[0]["test_nll"])
    write_results(rows, tmp_path / "a.csv")
    write_results(run_benchmark(grid), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    header = next(csv.reader(open(tmp_path / "a.csv")))
    assert header[:8] == ["dim", "depth", "c1", "c2", "seed", "train_nll", "test_nll", "mean_sparsity"]
    write_manifest(grid, tmp_path / "m.json")
    rebuilt = BenchmarkGrid.from_dict(json.load(open(tmp_path / "m.json"))["grid"])
    assert rebuilt == grid


def test_failing_cell_is_recorded():
    bad = TrainConfig.from_dict({**TINY_TRAIN.to_dict(), "step": 1e300})
    grid = BenchmarkGrid(dims=[3], l1_coefficients=[0.0, 0.1], hidden_layer_counts=[1], n_samples=20, train=bad)
    with np.errstate(all="ignore"):
        rows = run_benchmark(grid)
    assert len(rows) == 2
    assert all(r["error"] for r in rows)
    assert all(np.isnan(r["test_nll"]) for r in rows)


def test_gmm_data_split_sizes():
    data = gmm_data(5, 100, seed=0)
    assert data["source_train"].shape == data["source_test"].shape == (50, 5)
