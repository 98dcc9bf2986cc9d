import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from enot.cost import EnCost
from enot.theory import (
    GridFunction,
    grid_c_transform,
    grid_sup_transform,
    lipschitz_bound,
    make_grid,
    rough_psi,
    weak_concavity_check,
)

COST = EnCost(0.7, 0.3)


def test_zero_psi_gives_zero():
    for d, res in ((1, 32), (2, 16)):
        phi = grid_c_transform(make_grid(d, res), COST)
        np.testing.assert_array_equal(phi.values, 0.0)


def test_single_support_point():
    vals = np.full(33, np.inf)
    vals[16] = 0.0  # the node at 0 on [-1, 1]
    phi = grid_c_transform(make_grid(1, 33, values=vals), COST)
    x = phi.axes[0]
    np.testing.assert_allclose(phi.values, COST.c2 * x ** 2 + COST.c1 * np.abs(x), atol=1e-15)


def test_single_support_point_2d():
    vals = np.full((17, 17), np.inf)
    vals[8, 8] = 0.0
    phi = grid_c_transform(make_grid(2, 17, values=vals), COST)
    nodes = phi.nodes()
    np.testing.assert_allclose(phi.values.ravel(), COST.penalty(nodes), atol=1e-15)


def test_transform_idempotent():
    for d, res in ((1, 64), (2, 20)):
        phi = grid_c_transform(rough_psi(d, res, seed=1), COST)
        again = grid_c_transform(grid_sup_transform(phi, COST), COST)
        np.testing.assert_allclose(again.values, phi.values, atol=1e-12)


def test_transform_below_psi_and_monotone_in_cost():
    psi = rough_psi(1, 128, seed=2)
    phi = grid_c_transform(psi, COST)
    assert np.all(phi.values <= psi.values)
    bigger1 = grid_c_transform(psi, EnCost(0.7, 0.6))
    bigger2 = grid_c_transform(psi, EnCost(1.4, 0.3))
    assert np.all(bigger1.values >= phi.values) and np.all(bigger2.values >= phi.values)


def test_input_validation():
    with pytest.raises(ValueError):
        grid_c_transform(make_grid(1, 8), COST)
    with pytest.raises(ValueError):
        make_grid(3, 16)
    with pytest.raises(ValueError):
        GridFunction((0.0,), (1.0,), 16, np.zeros(15))
    with pytest.raises(ValueError):
        GridFunction((0.0,), (1.0,), 16, np.full(16, np.nan))
    with pytest.raises(ValueError):
        grid_c_transform(make_grid(1, 16, values=np.full(16, np.inf)), COST)
    with pytest.raises(ValueError):
        weak_concavity_check(make_grid(1, 16), COST, trials=0)


def test_lipschitz_bound_holds_on_grid():
    phi = grid_c_transform(rough_psi(2, 24, seed=3), COST)
    L = lipschitz_bound(phi, COST)
    nodes, v = phi.nodes(), phi.values.ravel()
    dist = np.linalg.norm(nodes[:, None] - nodes[None], axis=-1)
    diff = np.abs(v[:, None] - v[None])
    assert np.all(diff <= L * dist + 1e-12)


@given(st.integers(0, 2**31), st.sampled_from([1, 2]))
def test_weak_concavity_holds(seed, d):
    rng = np.random.default_rng(seed)
    cost = EnCost(rng.uniform(0.05, 3.0), rng.uniform(0.0, 2.0))
    phi = grid_c_transform(rough_psi(d, 48 if d == 1 else 16, seed=seed, scale=rng.uniform(0.1, 5)), cost)
    rep = weak_concavity_check(phi, cost, trials=200, seed=seed)
    assert rep.violations == 0


def test_rough_psi_fails_without_transform():
    # The check has teeth: raw noise is far from weakly concave.
    psi = rough_psi(1, 256, seed=0, scale=5.0)
    assert weak_concavity_check(psi, EnCost(0.01, 0.0), trials=500, seed=0).violations > 0


def test_report_json_shape():
    phi = grid_c_transform(rough_psi(1, 32, seed=0), COST)
    doc = weak_concavity_check(phi, COST, trials=10).to_dict()
    assert {"trials", "violations", "worst_slack", "grid_spec", "slack_formula"} <= set(doc)
    assert doc["grid_spec"]["resolution"] == 32


def test_degenerate_triples_have_no_violation():
    phi = grid_c_transform(rough_psi(1, 64, seed=4), COST)
    # Pairs with x == y reduce the inequality to phi(x) >= phi(x).
    nodes = phi.nodes()[:, 0]
    v = phi.values
    for i in range(0, 64, 7):
        for g in (0.0, 0.3, 1.0):
            z = g * nodes[i] + (1 - g) * nodes[i]
            assert v[phi.snap_index([[z]])[0]] >= g * v[i] + (1 - g) * v[i] - 1e-15
