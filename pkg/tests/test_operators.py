"""Tests for split operators and the subset-selection machinery."""

import math

import numpy as np
import pytest

from kptwist.operators import (
    ContractError,
    MIN_NESTED_K,
    SelectionReport,
    SplitOperator,
    flat_unit_vector,
    gamma_threshold_subset,
    nested_selection,
    random_split_operator,
    rank_one_selection,
    rms_gamma_check,
)
from kptwist.opnorm import opnorm_upper
from kptwist.space import InputError, TwistedVector, kp_norm


# ---------------------------------------------------------------------------
# SplitOperator basics


def test_identity_action():
    T = SplitOperator.identity(3)
    x = TwistedVector(np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0]))
    y = T.apply(x)
    np.testing.assert_array_equal(y.a, x.a)
    np.testing.assert_array_equal(y.b, x.b)


def test_single_block_action():
    T = SplitOperator(np.array([[[1.0, 2.0], [3.0, 4.0]]]))
    y = T.apply(TwistedVector(np.array([5.0]), np.array([6.0])))
    assert (y.a[0], y.b[0]) == (17.0, 39.0)


def test_basis_image_norms():
    # kp_norm(T e_j) = |alpha_j| + |gamma_j| and kp_norm(T f_j) = |delta_j| + |beta_j|
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        T = random_split_operator(n, rng)
        for j in range(n):
            e = TwistedVector(np.eye(n)[j], np.zeros(n))
            f = TwistedVector(np.zeros(n), np.eye(n)[j])
            assert kp_norm(T.apply(e)) == pytest.approx(
                abs(T.alpha[j]) + abs(T.gamma[j]), abs=1e-12)
            assert kp_norm(T.apply(f)) == pytest.approx(
                abs(T.delta[j]) + abs(T.beta[j]), abs=1e-12)


def test_apply_batch_matches_apply():
    rng = np.random.default_rng(1)
    T = random_split_operator(5, rng)
    X = rng.standard_normal((20, 10))
    Y = T.apply_batch(X)
    for i in range(20):
        y = T.apply(TwistedVector.from_array(X[i]))
        np.testing.assert_allclose(Y[i], y.to_array(), rtol=1e-14)


def test_as_matrix_matches_apply():
    rng = np.random.default_rng(2)
    T = random_split_operator(4, rng)
    X = rng.standard_normal((10, 8))
    np.testing.assert_allclose(T.apply_batch(X), X @ T.as_matrix().T, rtol=1e-13)


def test_entry_lower_bound():
    T = SplitOperator(np.array([[[0.0, 0.0], [2.0, 0.0]]]))
    assert T.entry_lower_bound() == 2.0
    e1 = TwistedVector(np.array([1.0]), np.array([0.0]))
    assert kp_norm(T.apply(e1)) == 2.0
    assert SplitOperator.identity(7).entry_lower_bound() == 1.0


def test_entry_lower_bound_below_upper_bound():
    rng = np.random.default_rng(3)
    for _ in range(100):
        T = random_split_operator(int(rng.integers(1, 20)), rng)
        assert T.entry_lower_bound() <= opnorm_upper(T).value + 1e-9


def test_json_roundtrip():
    rng = np.random.default_rng(4)
    T = random_split_operator(3, rng)
    U = SplitOperator.from_json(T.to_json())
    np.testing.assert_allclose(U.blocks, T.blocks, rtol=1e-15)
    assert len(T.to_json()["blocks"]) == 3
    assert len(T.to_json()["blocks"][0]) == 4


def test_operator_validation():
    with pytest.raises(InputError):
        SplitOperator(np.zeros((0, 2, 2)))
    with pytest.raises(InputError):
        SplitOperator(np.zeros((2, 3, 2)))
    with pytest.raises(InputError):
        SplitOperator(np.full((1, 2, 2), np.nan))
    T = SplitOperator.identity(2)
    with pytest.raises(InputError):
        T.apply(TwistedVector(np.zeros(3), np.zeros(3)))


# ---------------------------------------------------------------------------
# flat test vectors and the RMS inequality


def test_flat_vector_k4_values():
    x = flat_unit_vector([0, 1, 2, 3], 4)
    np.testing.assert_allclose(x.b, 0.5)
    np.testing.assert_allclose(x.a, -math.log(2.0) / 2.0)
    np.testing.assert_allclose(x.a, -0.346574, atol=1e-6)
    assert kp_norm(x) == pytest.approx(1.0, abs=1e-12)


def test_flat_vector_full_support():
    assert kp_norm(flat_unit_vector([0, 1], 2)) == pytest.approx(1.0, abs=1e-12)


def test_flat_vector_permutation_invariance():
    x = flat_unit_vector([0, 1, 2], 8)
    y = flat_unit_vector([5, 6, 7], 8)
    assert kp_norm(x) == pytest.approx(kp_norm(y), abs=1e-15)


def test_flat_vector_validation():
    with pytest.raises(InputError):
        flat_unit_vector([0], 4)
    with pytest.raises(InputError):
        flat_unit_vector([0, 4], 4)


def test_rms_check_identity():
    lhs, rhs = rms_gamma_check(SplitOperator.identity(4), [0, 1, 2, 3])
    assert lhs == pytest.approx(-1.0, abs=1e-12)
    assert rhs == pytest.approx(1.0, abs=1e-12)


def test_rms_check_pure_gamma():
    # alpha = beta = delta = 0, gamma = c: the image is (0, c * a_A), and
    # the lhs reduces to c * log sqrt k
    n, k, c = 6, 4, 1.7
    blocks = np.zeros((n, 2, 2))
    blocks[:, 1, 0] = c
    T = SplitOperator(blocks)
    subset = [0, 2, 3, 5]
    lhs, rhs = rms_gamma_check(T, subset)
    assert lhs == pytest.approx(c * math.log(math.sqrt(k)), rel=1e-12)
    a_part = flat_unit_vector(subset, n).a
    want_rhs = kp_norm(TwistedVector(np.zeros(n), c * a_part))
    assert rhs == pytest.approx(want_rhs, rel=1e-12)
    assert lhs <= rhs + 1e-9


def test_rms_check_random_sweep():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(4, 65))
        T = random_split_operator(n, rng)
        k = int(rng.integers(2, n + 1))
        subset = rng.choice(n, size=k, replace=False)
        lhs, rhs = rms_gamma_check(T, subset)
        assert lhs <= rhs + 1e-9


# ---------------------------------------------------------------------------
# threshold and nested selection


def test_threshold_all_gamma_zero():
    T = SplitOperator.identity(8)
    rep = gamma_threshold_subset(T, range(8), 1.0)
    assert rep.output_set == tuple(range(8))


def test_threshold_worked_example():
    blocks = np.zeros((4, 2, 2))
    blocks[:, 1, 0] = [5.0, 1.0, 0.5, 6.0]
    T = SplitOperator(blocks)
    rep = gamma_threshold_subset(T, [0, 1, 2, 3], 1.0)
    # threshold 4 sqrt(2) / ln 4 ~ 4.0807 keeps the entries 1 and 0.5
    assert rep.stage_thresholds[0][1] == pytest.approx(4.0806, abs=1e-3)
    assert rep.output_set == (1, 2)


def test_threshold_certified_half_survival():
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(8, 65))
        T = random_split_operator(n, rng)
        M = opnorm_upper(T).value
        k = int(rng.integers(2, n + 1))
        subset = rng.choice(n, size=k, replace=False)
        rep = gamma_threshold_subset(T, subset, M)
        assert len(rep.output_set) >= math.ceil(k / 2)


def test_nested_identity_maxima_zero():
    T = SplitOperator.identity(64)
    rep = nested_selection(T, range(64), 1.0)
    assert rep.achieved_max_gamma == 0.0
    assert rep.achieved_max_delta_minus_alpha == 0.0
    assert len(rep.output_set) >= 2


def test_nested_near_identity_noise():
    rng = np.random.default_rng(7)
    noise = 1e-6
    blocks = np.broadcast_to(np.eye(2), (64, 2, 2)).copy()
    blocks[:, 1, 0] = rng.uniform(-noise, noise, size=64)
    T = SplitOperator(blocks)
    rep = nested_selection(T, range(64), 3.0)
    assert rep.achieved_max_delta_minus_alpha == 0.0
    assert rep.achieved_max_gamma <= noise


def test_nested_size_guarantee():
    rng = np.random.default_rng(8)
    for _ in range(30):
        n = int(rng.integers(MIN_NESTED_K + 1, 257))
        T = random_split_operator(n, rng)
        M = opnorm_upper(T).value
        rep = nested_selection(T, range(n), M)
        assert len(rep.output_set) >= math.sqrt(n) / (2.0 * math.sqrt(2.0)) - 1.0
        assert set(rep.output_set) <= set(rep.input_set)
        assert len(rep.stage_thresholds) == 3


def test_nested_rejects_small_subsets():
    T = SplitOperator.identity(MIN_NESTED_K)
    with pytest.raises(InputError):
        nested_selection(T, range(MIN_NESTED_K), 1.0)


def test_selection_report_validates_subset():
    with pytest.raises(InputError):
        SelectionReport(input_set=(0, 1), output_set=(2,))


# ---------------------------------------------------------------------------
# rank-one case analysis


def test_rank_one_single_term():
    B, classes, A_sel = rank_one_selection([(0.0, 1.0, 1.0)], 1.0)
    assert B == (0,)
    assert classes[0] == "iv"
    assert A_sel == (0,)


def test_rank_one_two_degenerate_terms():
    terms = [(0.0, 0.6, 1.0), (0.0, 0.4, 1.0)]
    B, classes, A_sel = rank_one_selection(terms, 1.0)
    assert B == (0, 1)
    assert classes == {0: "iv", 1: "iv"}
    assert A_sel == (0, 1)
    assert sum(terms[i][2] * terms[i][1] for i in A_sel) == pytest.approx(1.0)


def test_rank_one_small_theta_excluded():
    # K must cover sum |b_i| = 1.9; the threshold 1/(2K) ~ 0.263 still
    # excludes the theta = 0.1 term
    terms = [(0.0, 0.9, 1.0), (0.0, 1.0, 0.1)]
    B, classes, A_sel = rank_one_selection(terms, 1.9)
    assert B == (0,)
    assert sum(terms[i][2] * terms[i][1] for i in B) == pytest.approx(0.9)
    assert 0.9 > 0.5


def test_rank_one_selection_guarantees():
    from kptwist.sweep import random_rank_one_instance

    rng = np.random.default_rng(9)
    for _ in range(2000):
        terms, K = random_rank_one_instance(rng)
        B, classes, A_sel = rank_one_selection(terms, K)
        assert sum(terms[i][2] * terms[i][1] for i in B) > 0.5
        assert sum(terms[i][2] * terms[i][1] for i in A_sel) > 0.125
        labels = {classes[i] for i in A_sel}
        assert len(labels) <= 1


def test_rank_one_precondition_checks():
    with pytest.raises(ContractError):
        rank_one_selection([(0.0, 0.9, 1.0)], 1.0)  # sum theta b != 1
    with pytest.raises(ContractError):
        rank_one_selection([(0.0, 1.0, 1.0), (0.0, 0.5, 0.0)], 1.2)  # sum|b| > K
    with pytest.raises(InputError):
        rank_one_selection([(0.0, 1.0, 1.0)], -1.0)
