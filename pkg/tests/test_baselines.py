import numpy as np
import pytest

from setkernels.baselines import (
    GridSeries,
    fixed_hsic_test,
    fixed_mmd_test,
    pcc_perm_test,
    pearson,
    series_summary,
    spline_to_grid,
)
from setkernels.data import DataError, ObservationSet
from setkernels.statistics import rmmd2_loop_oracle, vstat_hsic_oracle
from setkernels.kernels import gaussian_K
from setkernels.synthetic import IndependenceDesign, TwoSampleDesign, gen_independence, gen_two_sample


def test_spline_exact_on_lines():
    rng = np.random.default_rng(0)
    t = np.sort(rng.uniform(0, 1, 12))
    g = spline_to_grid(ObservationSet("a", np.column_stack([t, 2 * t])), T=25)
    grid = np.linspace(0, 1, 25)
    inside = (grid >= t[0]) & (grid <= t[-1])
    np.testing.assert_allclose(g.values[inside], 2 * grid[inside], atol=1e-10)
    # outside the data range the boundary value is held
    np.testing.assert_allclose(g.values[grid < t[0]], 2 * t[0], atol=1e-10)
    np.testing.assert_allclose(g.values[grid > t[-1]], 2 * t[-1], atol=1e-10)


def test_spline_two_points_linear():
    g = spline_to_grid(ObservationSet("a", [[0.2, 1.0], [0.8, 4.0]]), T=11)
    grid = np.linspace(0, 1, 11)
    inside = (grid >= 0.2) & (grid <= 0.8)
    np.testing.assert_allclose(g.values[inside], 1 + 5 * (grid[inside] - 0.2), atol=1e-12)


def test_spline_sine_accuracy():
    t = np.linspace(0, 1, 30)
    g = spline_to_grid(ObservationSet("s", np.column_stack([t, np.sin(2 * np.pi * t)])), T=50)
    assert np.max(np.abs(g.values - np.sin(2 * np.pi * np.linspace(0, 1, 50)))) < 0.02


def test_spline_duplicates_and_errors():
    g = spline_to_grid(ObservationSet("d", [[0.0, 0.0], [0.5, 1.0], [0.5, 3.0], [1.0, 4.0]]), T=3)
    assert g.values[1] == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(DataError):
        spline_to_grid(ObservationSet("x", [[0.3, 1.0], [0.3, 2.0]]))
    with pytest.raises(ValueError):
        GridSeries(np.zeros(1), 1)


def test_spline_multichannel_concatenates():
    t = np.linspace(0, 1, 5)
    g = spline_to_grid(ObservationSet("m", np.column_stack([t, t, -t])), T=4)
    np.testing.assert_allclose(g.values, np.concatenate([np.linspace(0, 1, 4), -np.linspace(0, 1, 4)]), atol=1e-12)


def test_fixed_mmd_loop_oracle():
    rng = np.random.default_rng(1)
    X, Y = rng.normal(size=(7, 5)), rng.normal(size=(6, 5))
    res = fixed_mmd_test(X, Y, sigma_sq=1.7, B=50)
    expect = rmmd2_loop_oracle(X, Y, np.full(7, 1 / 7), np.full(6, 1 / 6), 1.7)
    assert abs(res.statistic - expect) < 1e-12
    # an independent closed-form double loop
    k = lambda a, b: gaussian_K(a, b, 1.7)
    direct = (sum(k(a, b) for a in X for b in X) / 49 + sum(k(a, b) for a in Y for b in Y) / 36
              - 2 * sum(k(a, b) for a in X for b in Y) / 42)
    assert abs(res.statistic - direct) < 1e-12


def test_fixed_mmd_identical():
    X = np.random.default_rng(2).normal(size=(10, 4))
    res = fixed_mmd_test(X, X.copy(), B=99)
    assert abs(res.statistic) < 1e-12 and res.p_value > 0.9


def test_fixed_mmd_length_mismatch():
    with pytest.raises(DataError):
        fixed_mmd_test(np.zeros((3, 4)), np.zeros((3, 5)), sigma_sq=1.0)


def test_fixed_hsic_oracle_and_constant():
    rng = np.random.default_rng(3)
    X, Y = rng.normal(size=(12, 4)), rng.normal(size=(12, 3))
    res = fixed_hsic_test(X, Y, 0.8, 1.3, B=30)
    K = np.array([[gaussian_K(a, b, 0.8) for b in X] for a in X])
    L = np.array([[gaussian_K(a, b, 1.3) for b in Y] for a in Y])
    assert abs(res.statistic - vstat_hsic_oracle(K, L)) < 1e-10
    res = fixed_hsic_test(X, np.ones((12, 3)), 0.8, 1.0, B=30)
    assert abs(res.statistic) < 1e-12


def test_fixed_tests_with_tuning_run():
    rng = np.random.default_rng(4)
    X, Y = rng.normal(size=(30, 6)), rng.normal(1.0, 1.0, size=(30, 6))
    res = fixed_mmd_test(X, Y, B=50, multipliers=(0.5, 1, 2))
    assert res.selected_params["multiplier"] in (0.5, 1, 2) and res.reject
    res = fixed_hsic_test(X, X ** 2, B=50, multipliers=(0.5, 1, 2), B_inner=20)
    assert 1 / 51 <= res.p_value <= 1


def test_pcc_examples():
    x = np.random.default_rng(5).normal(size=40)
    res = pcc_perm_test(x, x, M=99, seed=1)
    assert res.statistic == pytest.approx(1.0) and res.p_value <= 2 / 100
    res = pcc_perm_test(x, -x, M=99, seed=1)
    assert res.statistic == pytest.approx(-1.0) and res.reject
    with pytest.raises(DataError):
        pcc_perm_test(x, np.ones(40))
    assert pearson(x, 3 * x + 1) == pytest.approx(1.0)


def test_series_summary_is_grid_mean():
    t = np.linspace(0, 1, 9)
    assert series_summary(ObservationSet("a", np.column_stack([t, 4 * t])), T=5) == pytest.approx(2.0)


@pytest.mark.slow
def test_fixed_mmd_type_one():
    rejects = 0
    for r in range(200):
        x = gen_two_sample(TwoSampleDesign(N=50, seed=2 * r))
        y = gen_two_sample(TwoSampleDesign(N=50, seed=2 * r + 1))
        gx = [spline_to_grid(s) for s in x.sets]
        gy = [spline_to_grid(s) for s in y.sets]
        rejects += fixed_mmd_test(gx, gy, B=200, seed=r).reject
    assert 0.01 <= rejects / 200 <= 0.10


@pytest.mark.slow
def test_fixed_hsic_type_one():
    rejects = 0
    for r in range(200):
        ps = gen_independence(IndependenceDesign(N=50, seed=r), dependent=False)
        gx = [spline_to_grid(p[0]) for p in ps.pairs]
        gy = [spline_to_grid(p[1]) for p in ps.pairs]
        rejects += fixed_hsic_test(gx, gy, B=200, seed=r).reject
    assert 0.01 <= rejects / 200 <= 0.10


@pytest.mark.slow
def test_pcc_type_one():
    rng = np.random.default_rng(6)
    rejects = sum(pcc_perm_test(rng.normal(size=200), rng.normal(size=200), M=200, seed=r).reject
                  for r in range(200))
    assert 0.01 <= rejects / 200 <= 0.10
