import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setkernels.kernels import gaussian_K, kernel_matrix
from setkernels.rff import EmbeddedSample, embed_sample, sample_basis
from setkernels.statistics import (
    StatisticValue,
    centering,
    composed_mmd_oracle,
    rhsic,
    rhsic_from_grams,
    rmmd2,
    rmmd2_loop_oracle,
    vstat_hsic_oracle,
)
from setkernels.synthetic import TwoSampleDesign, gen_two_sample

from conftest import random_embedded


def matrix_hsic(K, L):
    n = K.shape[0]
    H = np.eye(n) - np.ones((n, n)) / n
    return np.trace(K @ H @ L @ H) / n**2


def test_identical_samples_give_zero(rng):
    A = random_embedded(rng, 6, 4)
    assert abs(rmmd2(A, A, 1.3).value) < 1e-12


def test_singletons_closed_form():
    u, v = np.array([[0.1, 0.5]]), np.array([[1.0, -0.3]])
    A, B = EmbeddedSample(u, [1.0], "f"), EmbeddedSample(v, [1.0], "f")
    assert rmmd2(A, B, 0.9).value == pytest.approx(2 - 2 * gaussian_K(u[0], v[0], 0.9), abs=1e-14)


@pytest.mark.parametrize("trial", range(20))
def test_rmmd2_matches_loop_oracle(trial):
    rng = np.random.default_rng(trial)
    n, m = rng.integers(1, 21, size=2)
    A, B = random_embedded(rng, n, 3), random_embedded(rng, m, 3)
    ls = float(rng.uniform(0.2, 3))
    expect = rmmd2_loop_oracle(A.embeddings, B.embeddings, A.weights, B.weights, ls)
    assert abs(rmmd2(A, B, ls).value - expect) <= 1e-12


def test_rmmd2_symmetric_and_uniform_vstat(rng):
    A, B = random_embedded(rng, 7, 3, uniform=True), random_embedded(rng, 5, 3, uniform=True)
    assert rmmd2(A, B, 0.8).value == pytest.approx(rmmd2(B, A, 0.8).value, abs=1e-14)
    Kxx = kernel_matrix(A.embeddings, A.embeddings, 0.8)
    Kyy = kernel_matrix(B.embeddings, B.embeddings, 0.8)
    Kxy = kernel_matrix(A.embeddings, B.embeddings, 0.8)
    vstat = Kxx.mean() + Kyy.mean() - 2 * Kxy.mean()
    assert abs(rmmd2(A, B, 0.8).value - vstat) < 1e-12


def test_composed_kernel_oracle():
    rng = np.random.default_rng(4)
    xs, ys = rng.normal(size=(8, 1)), rng.normal(0.5, 1.0, size=(8, 1))
    l1, l2 = 1.0, 0.5
    b = sample_basis(5000, 1, l1, 11)
    from setkernels.data import ObservationSet, Sample
    ex = embed_sample(Sample(tuple(ObservationSet(str(i), p[None]) for i, p in enumerate(xs))), b)
    ey = embed_sample(Sample(tuple(ObservationSet(str(i), p[None]) for i, p in enumerate(ys))), b)
    assert abs(rmmd2(ex.with_uniform_weights(), ey.with_uniform_weights(), l2).value
               - composed_mmd_oracle(xs, ys, l1, l2)) < 0.01


def test_composed_oracle_trivial_cases():
    assert composed_mmd_oracle([[0.0]], [[0.0]], 0.3, 2.0) == 0.0
    pts = [[0.1], [0.7]]
    assert abs(composed_mmd_oracle(pts, pts, 1, 1)) < 1e-15


def test_statistic_value_clamp():
    assert StatisticValue(-1e-14, "rmmd2", 2, 2).reported == 0.0
    assert StatisticValue(-1e-14, "rmmd2", 2, 2).value == -1e-14
    with pytest.raises(FloatingPointError):
        StatisticValue(float("nan"), "rmmd2", 2, 2)


@pytest.mark.parametrize("a, b", [(0.3, 0.6), (0.0, 0.0), (0.9, 0.1)])
def test_rhsic_two_by_two(a, b):
    K, L = np.array([[1, a], [a, 1]]), np.array([[1, b], [b, 1]])
    w = np.full(2, 0.5)
    got = rhsic_from_grams(K, L, w, w)
    assert got == pytest.approx(matrix_hsic(K, L), abs=1e-15)
    assert got == pytest.approx((1 - a) * (1 - b) / 4, abs=1e-15)


def test_vstat_oracle_examples():
    assert vstat_hsic_oracle(np.eye(2), np.eye(2)) == pytest.approx(0.25, abs=1e-15)
    assert vstat_hsic_oracle(np.ones((3, 3)), np.ones((3, 3))) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("trial", range(30))
def test_vstat_oracle_matches_matrix(trial):
    rng = np.random.default_rng(100 + trial)
    A, B = rng.normal(size=(8, 8)), rng.normal(size=(8, 8))
    K, L = A @ A.T, B @ B.T
    assert abs(vstat_hsic_oracle(K, L) - matrix_hsic(K, L)) < 1e-10


def test_rhsic_uniform_matches_both_oracles(rng):
    A, B = random_embedded(rng, 12, 3, "a", uniform=True), random_embedded(rng, 12, 5, "b", uniform=True)
    K = kernel_matrix(A.embeddings, A.embeddings, 1.1)
    L = kernel_matrix(B.embeddings, B.embeddings, 2.2)
    got = rhsic(A, B, 1.1, 2.2).value
    assert abs(got - matrix_hsic(K, L)) < 1e-10
    assert abs(got - vstat_hsic_oracle(K, L)) < 1e-10
    assert got == pytest.approx(rhsic(B, A, 2.2, 1.1).value, abs=1e-14)


def test_rhsic_weighted_definition(rng):
    A, B = random_embedded(rng, 6, 3, "a"), random_embedded(rng, 6, 2, "b")
    K = kernel_matrix(A.embeddings, A.embeddings, 1.0)
    L = kernel_matrix(B.embeddings, B.embeddings, 1.0)
    Kh = K * np.outer(A.weights, A.weights)
    Lh = L * np.outer(B.weights, B.weights)
    H = np.eye(6) - 1 / 6
    assert rhsic(A, B, 1.0, 1.0).value == pytest.approx(36 * np.trace(Kh @ H @ Lh @ H), abs=1e-13)


def test_rhsic_constant_L_is_zero(rng):
    K = kernel_matrix(*(2 * [rng.normal(size=(7, 2))]), 1.0)
    w = np.full(7, 1 / 7)
    assert abs(rhsic_from_grams(K, np.full((7, 7), 0.4), w, w)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.floats(-5, 5), st.integers(0, 10**6))
def test_rhsic_invariant_to_constant_shift(n, c, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.normal(size=(n, n)), rng.normal(size=(n, n))
    K, L = A @ A.T, B @ B.T
    w = np.full(n, 1.0 / n)
    base = rhsic_from_grams(K, L, w, w)
    assert rhsic_from_grams(K + c, L, w, w) == pytest.approx(base, abs=1e-9 * (1 + abs(base)))
    assert rhsic_from_grams(K, L + c, w, w) == pytest.approx(base, abs=1e-9 * (1 + abs(base)))


def test_centering_idempotent():
    H = centering(5)
    np.testing.assert_allclose(H @ H, H, atol=1e-15)
    np.testing.assert_allclose(H.sum(axis=0), 0, atol=1e-15)


@pytest.mark.slow
def test_h0_statistic_shrinks_with_set_size():
    b = sample_basis(50, 2, 0.5, 3)
    medians = {}
    for n in (10, 500):
        vals = []
        for t in range(50):
            x = gen_two_sample(TwoSampleDesign(N=20, set_size_range=(n, n), seed=2 * t))
            y = gen_two_sample(TwoSampleDesign(N=20, set_size_range=(n, n), seed=2 * t + 1))
            vals.append(rmmd2(embed_sample(x, b), embed_sample(y, b), 0.5).value)
        medians[n] = np.median(vals)
    assert medians[500] < medians[10]
