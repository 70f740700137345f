"""Tests for group sampling, richness detection, the symmetry Monte
Carlo, and the trace-duality sandwich."""

import math

import numpy as np
import pytest

from kptwist.asymmetry import (
    GroupSpec,
    asym_mc,
    haar_orthogonal,
    is_rich,
    sample_group,
    trace_duality_sandwich,
)
from kptwist.space import InputError, kp_norm_batch


# ---------------------------------------------------------------------------
# sampling


def test_group_spec_validation():
    with pytest.raises(InputError):
        GroupSpec("Dihedral", 4)
    with pytest.raises(InputError):
        GroupSpec("FullOrthogonal", 3)
    with pytest.raises(InputError):
        GroupSpec("FullOrthogonal", 0)
    assert GroupSpec("FullOrthogonal", 8).n == 4


@pytest.mark.parametrize("kind", ["FullOrthogonal", "SignedPermutations",
                                  "BlockSignedPermutations"])
def test_samples_are_orthogonal(kind):
    spec = GroupSpec(kind, 8)
    for seed in range(20):
        g = sample_group(spec, seed)
        np.testing.assert_allclose(g.T @ g, np.eye(8), atol=1e-12)


def test_signed_permutation_uniformity():
    # 2n = 2: the group has exactly 8 elements; check empirical frequencies
    spec = GroupSpec("SignedPermutations", 2)
    counts = {}
    draws = 10_000
    for seed in range(draws):
        g = sample_group(spec, seed)
        counts[tuple(g.ravel().astype(int))] = counts.get(
            tuple(g.ravel().astype(int)), 0) + 1
    assert len(counts) == 8
    expected = draws / 8
    sigma = math.sqrt(draws * (1 / 8) * (7 / 8))
    for c in counts.values():
        assert abs(c - expected) <= 3 * sigma


def test_block_signed_samples_are_isometries():
    spec = GroupSpec("BlockSignedPermutations", 12)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((50, 12))
    base = kp_norm_batch(X)
    for seed in range(10):
        g = sample_group(spec, seed)
        np.testing.assert_allclose(kp_norm_batch(X @ g.T), base, rtol=1e-12)


def test_haar_determinant_is_pm_one():
    rng = np.random.default_rng(1)
    for _ in range(10):
        g = haar_orthogonal(6, rng)
        assert abs(abs(np.linalg.det(g)) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# richness


def test_signed_permutations_rich():
    for d in (2, 4, 8, 16):
        dim, rich = is_rich(GroupSpec("SignedPermutations", d))
        assert dim == 1
        assert rich


def test_full_orthogonal_rich():
    for d in (2, 6, 12):
        dim, rich = is_rich(GroupSpec("FullOrthogonal", d), samples=50)
        assert dim == 1
        assert rich


def test_block_signed_not_rich():
    # the commutant contains every operator acting as one fixed 2x2 matrix
    # on all blocks, so its dimension is 4
    dim, rich = is_rich(GroupSpec("BlockSignedPermutations", 8))
    assert dim == 4
    assert not rich


@pytest.mark.parametrize("tol", [1e-10, 1e-8, 1e-6])
def test_richness_stable_across_tolerance(tol):
    assert is_rich(GroupSpec("SignedPermutations", 8), tol=tol)[0] == 1
    assert is_rich(GroupSpec("BlockSignedPermutations", 8), tol=tol)[0] == 4
    assert is_rich(GroupSpec("FullOrthogonal", 6), samples=50, tol=tol)[0] == 1


def test_richness_large_dimension_character_route():
    # above the dense limit the commutant dimension comes from the group
    # average of (tr g)^2; it must agree with the small-d null-space values
    assert is_rich(GroupSpec("SignedPermutations", 512))[0] == 1
    dim, rich = is_rich(GroupSpec("BlockSignedPermutations", 512))
    assert dim == 4
    assert not rich
    assert is_rich(GroupSpec("FullOrthogonal", 64))[0] == 1


def test_full_orthogonal_needs_enough_samples():
    with pytest.raises(InputError):
        is_rich(GroupSpec("FullOrthogonal", 8), samples=4)


# ---------------------------------------------------------------------------
# symmetry Monte Carlo


def test_asym_block_signed_mean_is_one():
    spec = GroupSpec("BlockSignedPermutations", 8)
    report = asym_mc(spec, 4, samples=10, restarts=5, seed=0)
    assert report.estimate.mean_norm == pytest.approx(1.0, abs=1e-12)
    assert not report.rich
    assert report.commutant_dim == 4


def test_asym_mean_below_envelope():
    spec = GroupSpec("SignedPermutations", 8)
    report = asym_mc(spec, 4, samples=10, restarts=5, seed=1)
    est = report.estimate
    assert est.mean_norm <= est.upper_envelope + 3 * est.std_error
    assert est.mean_norm >= 1.0 - 1e-9  # signed permutations map e_j to +-e_k
    assert report.rich


def test_asym_report_json_schema():
    spec = GroupSpec("SignedPermutations", 4)
    obj = asym_mc(spec, 2, samples=3, restarts=3, seed=0).to_json()
    assert set(obj) == {"group", "n", "samples", "mean_norm", "std_error",
                        "upper_envelope", "rich", "commutant_dim"}
    assert obj["group"] == "SignedPermutations"
    assert obj["n"] == 2
    assert obj["samples"] == 3


def test_asym_deterministic_given_seed():
    spec = GroupSpec("SignedPermutations", 6)
    a = asym_mc(spec, 3, samples=5, restarts=4, seed=9)
    b = asym_mc(spec, 3, samples=5, restarts=4, seed=9)
    assert a.estimate.mean_norm == b.estimate.mean_norm


def test_asym_validation():
    spec = GroupSpec("SignedPermutations", 6)
    with pytest.raises(InputError):
        asym_mc(spec, 3, samples=0)
    with pytest.raises(InputError):
        asym_mc(spec, 4, samples=1)  # dimension mismatch


# ---------------------------------------------------------------------------
# trace-duality sandwich


def test_sandwich_diag_example():
    # S = diag(2, 1): ||S|| = 2, nu(S^-1) = 1.5, LEFT is 2 <= 3
    sv = np.array([2.0, 1.0])
    product = sv[0] * np.sum(1.0 / sv)
    assert product == pytest.approx(3.0)
    assert 2.0 <= product


def test_sandwich_left_never_violated():
    for k in (1, 2, 5, 16):
        rep = trace_duality_sandwich(k, trials=200, mc_samples=0,
                                     right_checks=0, seed=0)
        assert rep.left_violations == 0
        assert rep.min_left_slack >= -1e-8


def test_sandwich_right_within_two_se():
    rep = trace_duality_sandwich(4, trials=20, mc_samples=500,
                                 right_checks=3, seed=1)
    assert rep.right_violations == 0
    assert rep.passed


def test_sandwich_validation():
    with pytest.raises(InputError):
        trace_duality_sandwich(0)
