import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from setkernels._seeding import permutation_matrix
from setkernels.kernels import kernel_matrix
from setkernels.permutation import (
    TestResult,
    independence_null,
    independence_permutation_test,
    p_value,
    two_sample_null,
    two_sample_permutation_test,
)
from setkernels.rff import EmbeddedSample, embed_sample, sample_basis
from setkernels.statistics import rmmd2_loop_oracle
from setkernels.synthetic import IndependenceDesign, TwoSampleDesign, gen_independence, gen_two_sample

from conftest import random_embedded


def test_p_value_examples():
    assert p_value(10.0, [1, 2, 3, 4]) == pytest.approx(0.2)
    assert p_value(0.0, [1, 2, 3, 4]) == 1.0
    assert p_value(2.0, [2, 2, 2, 2]) == 1.0
    with pytest.raises(ValueError):
        p_value(1.0, [])


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=30), st.floats(-10, 10), st.floats(0, 5))
def test_p_value_bounds_and_monotone(nulls, obs, bump):
    p = p_value(obs, nulls)
    assert 1 / (len(nulls) + 1) <= p <= 1
    assert p_value(obs + bump, nulls) <= p


def test_permutation_rows_are_prefix_stable():
    a = permutation_matrix(9, 5, 3, "k")
    b = permutation_matrix(9, 50, 3, "k")
    np.testing.assert_array_equal(a, b[:5])
    assert all(sorted(r) == list(range(9)) for r in b)


def test_two_sample_null_matches_regrouping_oracle(rng):
    A, B = random_embedded(rng, 5, 3), random_embedded(rng, 4, 3)
    ls = 0.9
    null = two_sample_null(A, B, ls, 25, seed=4)
    perms = permutation_matrix(9, 25, 4, "two-sample")
    E = np.vstack([A.embeddings, B.embeddings])
    mass = np.concatenate([A.weights * 5, B.weights * 4])  # mean-one masses
    for b, P in enumerate(perms):
        gx, gy = P[:5], P[5:]
        wx = mass[gx] / mass[gx].sum()
        wy = mass[gy] / mass[gy].sum()
        assert null[b] == pytest.approx(rmmd2_loop_oracle(E[gx], E[gy], wx, wy, ls), abs=1e-12)


def test_identity_relabelling_reproduces_observed(rng):
    A, B = random_embedded(rng, 6, 2), random_embedded(rng, 3, 2)
    res = two_sample_permutation_test(A, B, 1.0, 20, 0.05, 0)
    expect = rmmd2_loop_oracle(A.embeddings, B.embeddings, A.weights, B.weights, 1.0)
    assert res.statistic == pytest.approx(expect, abs=1e-12)


def test_independence_null_matches_repairing_oracle(rng):
    A, B = random_embedded(rng, 7, 3, "a"), random_embedded(rng, 7, 2, "b")
    null = independence_null(A, B, 1.0, 0.6, 15, seed=2)
    perms = permutation_matrix(7, 15, 2, "independence")
    K = kernel_matrix(A.embeddings, A.embeddings, 1.0)
    H = np.eye(7) - 1 / 7
    for b, P in enumerate(perms):
        Ey, wy = B.embeddings[P], B.weights[P]  # a set travels with its weight
        L = kernel_matrix(Ey, Ey, 0.6)
        expect = 49 * np.trace((K * np.outer(A.weights, A.weights)) @ H @ (L * np.outer(wy, wy)) @ H)
        assert null[b] == pytest.approx(expect, abs=1e-12)


def test_identical_samples_p_one(rng):
    A = random_embedded(rng, 8, 3)
    B = EmbeddedSample(A.embeddings.copy(), A.weights.copy(), A.basis_fingerprint)
    res = two_sample_permutation_test(A, B, 1.0, 99, 0.05, 1)
    assert abs(res.statistic) < 1e-12
    assert res.p_value >= 0.9 and not res.reject


def test_two_point_null_values():
    # N = M = 1: the only relabellings are identity and swap, both give the same value
    A = EmbeddedSample(np.array([[0.0]]), [1.0], "f")
    B = EmbeddedSample(np.array([[1.0]]), [1.0], "f")
    null = two_sample_null(A, B, 1.0, 10, 0)
    np.testing.assert_allclose(null, 2 - 2 * np.exp(-0.5), atol=1e-14)


def test_determinism(rng):
    A, B = random_embedded(rng, 6, 2), random_embedded(rng, 6, 2)
    np.testing.assert_array_equal(two_sample_null(A, B, 1.0, 50, 9), two_sample_null(A, B, 1.0, 50, 9))
    C = random_embedded(rng, 6, 2, "c")
    np.testing.assert_array_equal(independence_null(A, C, 1, 1, 50, 9), independence_null(A, C, 1, 1, 50, 9))


def test_result_json_schema():
    res = TestResult(0.5, 0.2, False, 0.05, 4, {"a": np.float64(1.0)}, 3)
    d = json.loads(res.to_json())
    assert d == {"schema": 1, "statistic": 0.5, "p_value": 0.2, "reject": False, "alpha": 0.05,
                 "n_permutations": 4, "selected_params": {"a": 1.0}, "seed": 3}


def _h0_embedded(t, basis):
    x = gen_two_sample(TwoSampleDesign(N=100, seed=10_000 + 2 * t))
    y = gen_two_sample(TwoSampleDesign(N=100, seed=10_001 + 2 * t))
    return embed_sample(x, basis), embed_sample(y, basis)


@pytest.mark.slow
def test_two_sample_p_values_uniform_under_h0():
    basis = sample_basis(50, 2, 0.25, 1)
    ps = []
    for t in range(200):
        ex, ey = _h0_embedded(t, basis)
        ps.append(two_sample_permutation_test(ex, ey, 0.05, 200, 0.05, t).p_value)
    ps = np.array(ps)
    assert stats.kstest(ps, "uniform").pvalue > 0.01
    assert np.mean(ps <= 0.05) <= 0.10


@pytest.mark.slow
def test_independence_type_one():
    bx, by = sample_basis(50, 2, 0.25, 1), sample_basis(50, 2, 0.25, 2)
    rejects = 0
    for t in range(200):
        ps = gen_independence(IndependenceDesign(N=100, seed=t), dependent=False)
        ex, ey = embed_sample(ps.x, bx), embed_sample(ps.y, by)
        rejects += independence_permutation_test(ex, ey, 0.05, 0.05, 200, 0.05, t).reject
    assert 0.01 <= rejects / 200 <= 0.10
