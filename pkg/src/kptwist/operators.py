"""Block-diagonal operators on the twisted sum and their selection machinery.

An operator that preserves every 2-dimensional block span{e_j, f_j} is
represented by n real 2x2 matrices (alpha_j, beta_j; gamma_j, delta_j).
This module carries the combinatorial core of the growth argument: entry
bounds from basis-vector images, flat test vectors, RMS bounds on the
gamma row, threshold subsets, a nested subset selection, and the rank-one
case analysis over terms (a_i, b_i, theta_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .space import InputError, TwistedVector, kp_norm, kp_norm_batch

__all__ = [
    "SplitOperator",
    "SelectionReport",
    "flat_unit_vector",
    "rms_gamma_check",
    "gamma_threshold_subset",
    "nested_selection",
    "rank_one_selection",
]

#: Minimum subset size accepted by nested_selection; below this the nested
#: sqrt-stages degenerate.
MIN_NESTED_K = 16


@dataclass(frozen=True)
class SplitOperator:
    """n blocks of 2x2 matrices acting block-diagonally on the twisted sum."""

    blocks: np.ndarray  # shape (n, 2, 2)

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.ndim != 3 or blocks.shape[1:] != (2, 2) or blocks.shape[0] < 1:
            raise InputError("blocks must have shape (n, 2, 2) with n >= 1")
        if not np.isfinite(blocks).all():
            raise InputError("entries must be finite")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def alpha(self) -> np.ndarray:
        return self.blocks[:, 0, 0]

    @property
    def beta(self) -> np.ndarray:
        return self.blocks[:, 0, 1]

    @property
    def gamma(self) -> np.ndarray:
        return self.blocks[:, 1, 0]

    @property
    def delta(self) -> np.ndarray:
        return self.blocks[:, 1, 1]

    def apply(self, x: TwistedVector) -> TwistedVector:
        """Blockwise 2x2 action: (a_j, b_j) -> (alpha a + beta b, gamma a + delta b)."""
        if x.n != self.n:
            raise InputError("dimension mismatch")
        a2 = self.alpha * x.a + self.beta * x.b
        b2 = self.gamma * x.a + self.delta * x.b
        return TwistedVector(a2, b2)

    def apply_batch(self, X: np.ndarray) -> np.ndarray:
        """Row-wise action on a (m, 2n) batch."""
        n = self.n
        a = X[:, :n]
        b = X[:, n:]
        return np.hstack([self.alpha * a + self.beta * b, self.gamma * a + self.delta * b])

    def as_matrix(self) -> np.ndarray:
        """Dense 2n x 2n matrix in the (a-slots, b-slots) coordinate order."""
        n = self.n
        m = np.zeros((2 * n, 2 * n))
        idx = np.arange(n)
        m[idx, idx] = self.alpha
        m[idx, idx + n] = self.beta
        m[idx + n, idx] = self.gamma
        m[idx + n, idx + n] = self.delta
        return m

    def entry_lower_bound(self) -> float:
        """max_j max(|alpha|,|beta|,|gamma|,|delta|), a lower bound for the
        operator norm: the image of a basis vector e_j has quasi-norm
        |alpha_j| + |gamma_j|, and of f_j has |delta_j| + |beta_j|."""
        return float(np.abs(self.blocks).max())

    def to_json(self) -> dict:
        flat = np.stack([self.alpha, self.beta, self.gamma, self.delta], axis=1)
        return {"blocks": flat.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "SplitOperator":
        flat = np.asarray(obj["blocks"], dtype=float)
        return cls(flat.reshape(-1, 2, 2))

    @classmethod
    def identity(cls, n: int) -> "SplitOperator":
        return cls(np.broadcast_to(np.eye(2), (n, 2, 2)).copy())


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of one of the subset-selection procedures."""

    input_set: tuple
    output_set: tuple
    stage_thresholds: list = field(default_factory=list)
    achieved_max_gamma: float = 0.0
    achieved_max_delta_minus_alpha: float = 0.0

    def __post_init__(self):
        if not set(self.output_set) <= set(self.input_set):
            raise InputError("output_set must be a subset of input_set")


def flat_unit_vector(subset, n: int) -> TwistedVector:
    """Unit-quasi-norm vector flat on a k-subset: b_j = 1/sqrt(k) and
    a_j = log(1/sqrt(k))/sqrt(k) on the subset, zero elsewhere.

    The a-part equals F(b) exactly, so the quasi-norm is ||b||_2 = 1.
    """
    subset = np.asarray(sorted(subset), dtype=int)
    k = subset.size
    if k < 2:
        raise InputError("subset must have size >= 2")
    if subset.min() < 0 or subset.max() >= n:
        raise InputError("subset indices out of range")
    a = np.zeros(n)
    b = np.zeros(n)
    b[subset] = 1.0 / math.sqrt(k)
    a[subset] = math.log(1.0 / math.sqrt(k)) / math.sqrt(k)
    return TwistedVector(a, b)


def rms_gamma_check(T: SplitOperator, subset) -> tuple[float, float]:
    """Both sides of the RMS-gamma inequality for a flat test vector.

    Returns (lhs, rhs) with
        lhs = log(sqrt k) * (k^-1 sum_{j in A} gamma_j^2)^(1/2) - max_j |delta_j|
        rhs = kp_norm(T x_A),  x_A the flat unit vector on A.
    lhs <= rhs holds for every split operator and subset: the b-part of
    T x_A is exactly (delta_j - gamma_j log sqrt k)/sqrt k on A.
    """
    subset = np.asarray(sorted(subset), dtype=int)
    k = subset.size
    if k < 2:
        raise InputError("subset must have size >= 2")
    rms = math.sqrt(float(np.mean(T.gamma[subset] ** 2)))
    lhs = math.log(math.sqrt(k)) * rms - float(np.abs(T.delta).max())
    rhs = kp_norm(T.apply(flat_unit_vector(subset, T.n)))
    return lhs, rhs


def gamma_threshold_subset(T: SplitOperator, subset, M: float) -> SelectionReport:
    """Keep the indices of the subset whose |gamma_j| is below the threshold
    4*sqrt(2)*M / log k.

    When M is a certified upper bound on the operator norm, the RMS-gamma
    inequality forces at least half of the subset to survive.
    """
    if M <= 0:
        raise InputError("M must be positive")
    subset = tuple(sorted(subset))
    k = len(subset)
    if k < 2:
        raise InputError("subset must have size >= 2")
    thr = 4.0 * math.sqrt(2.0) * M / math.log(k)
    idx = np.asarray(subset, dtype=int)
    keep = idx[np.abs(T.gamma[idx]) <= thr]
    return SelectionReport(
        input_set=subset,
        output_set=tuple(int(j) for j in keep),
        stage_thresholds=[("abs_gamma", thr)],
        achieved_max_gamma=float(np.abs(T.gamma[keep]).max()) if keep.size else 0.0,
        achieved_max_delta_minus_alpha=float(np.abs((T.delta - T.alpha)[keep]).max())
        if keep.size
        else 0.0,
    )


def _rms_threshold_keep(values: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, float]:
    """Keep indices whose |value| is at most sqrt(2) times the RMS over idx.

    By Chebyshev at least half of idx survives.
    """
    rms = math.sqrt(float(np.mean(values[idx] ** 2)))
    thr = math.sqrt(2.0) * rms
    return idx[np.abs(values[idx]) <= thr], thr


def nested_selection(T: SplitOperator, subset, M: float) -> SelectionReport:
    """Three-stage nested selection producing a subset of size ~ sqrt(k)
    on which both |gamma_j| and |delta_j - alpha_j| are small.

    Stage 1 thresholds |gamma| (gamma_threshold_subset); stage 2 thresholds
    |delta - alpha - gamma log sqrt(k')| at sqrt(2) times its RMS; stage 3
    restricts to the ceil(sqrt(k')) survivors of smallest |gamma| and
    applies the analogous RMS threshold there.  The final subset has size
    at least sqrt(k)/(2 sqrt 2) - 1.
    """
    if M <= 0:
        raise InputError("M must be positive")
    subset = tuple(sorted(subset))
    k = len(subset)
    if k <= MIN_NESTED_K:
        raise InputError(f"subset size must exceed {MIN_NESTED_K}")

    stage1 = gamma_threshold_subset(T, subset, M)
    a_prime = np.asarray(stage1.output_set, dtype=int)
    k_prime = a_prime.size
    thresholds = list(stage1.stage_thresholds)

    resid1 = T.delta - T.alpha - T.gamma * math.log(math.sqrt(k_prime))
    b_set, thr2 = _rms_threshold_keep(resid1, a_prime)
    thresholds.append(("abs_delta_minus_alpha_minus_gamma_log", thr2))

    k3 = math.ceil(math.sqrt(k_prime))
    order = np.argsort(np.abs(T.gamma[b_set]), kind="stable")
    b_prime = np.sort(b_set[order[:k3]])

    resid2 = T.delta - T.alpha - T.gamma * math.log(math.sqrt(b_prime.size))
    final, thr3 = _rms_threshold_keep(resid2, b_prime)
    thresholds.append(("abs_delta_minus_alpha_minus_gamma_log_stage3", thr3))

    return SelectionReport(
        input_set=subset,
        output_set=tuple(int(j) for j in final),
        stage_thresholds=thresholds,
        achieved_max_gamma=float(np.abs(T.gamma[final]).max()),
        achieved_max_delta_minus_alpha=float(np.abs((T.delta - T.alpha)[final]).max()),
    )


class ContractError(ValueError):
    """A stated precondition of a selection procedure does not hold."""


#: classification labels, tested in this order; the first satisfied one wins
CASE_LABELS = ("i", "ii", "iii", "iv")


def _classify_term(a: float, b: float, theta: float, K: float) -> str:
    """First satisfied case for one rank-one term.

    Terms with theta == 1 are the degenerate (second-row-only) kind and use
    the variant of cases iii/iv that ignores a.  Weak inequalities count as
    satisfied, so the four cases are exhaustive.
    """
    tb = theta * b
    if theta * a > abs(tb) / (4.0 * K):
        return "i"
    if -theta * a > abs(tb) / (4.0 * K):
        return "ii"
    degenerate = theta == 1.0
    if degenerate:
        if -tb >= abs(tb) / 2.0:
            return "iii"
        if tb >= abs(tb) / 2.0:
            return "iv"
    else:
        if a - tb >= abs(tb) / 2.0:
            return "iii"
        if tb - a >= abs(tb) / 2.0:
            return "iv"
    raise ContractError(f"no case satisfied for term {(a, b, theta)}")


def rank_one_selection(terms, K: float):
    """Select the dominant single-class subset of large-theta rank-one terms.

    terms is a list of (a_i, b_i, theta_i) with sum theta_i b_i = 1 and
    sum |b_i| <= K.  Returns (B, classes, A_sel) where B is the index set
    {i: |theta_i| > 1/(2K)} (whose theta*b sum exceeds 1/2), classes maps
    each member of B to its first satisfied case label, and A_sel is the
    single-class subset of B with the largest theta*b sum (which exceeds
    1/8).  Indices are positions in the input list.
    """
    terms = [(float(a), float(b), float(t)) for a, b, t in terms]
    if K <= 0:
        raise InputError("K must be positive")
    tb_total = sum(t * b for a, b, t in terms)
    if abs(tb_total - 1.0) > 1e-9:
        raise ContractError(f"sum theta_i b_i = {tb_total!r}, expected 1")
    b_total = sum(abs(b) for a, b, t in terms)
    if b_total > K * (1.0 + 1e-12):
        raise ContractError(f"sum |b_i| = {b_total!r} exceeds K = {K!r}")

    B = [i for i, (a, b, t) in enumerate(terms) if abs(t) > 1.0 / (2.0 * K)]
    classes = {i: _classify_term(*terms[i], K) for i in B}

    best_label, best_sum = None, -math.inf
    for label in CASE_LABELS:
        s = sum(terms[i][2] * terms[i][1] for i in B if classes[i] == label)
        if s > best_sum:
            best_label, best_sum = label, s
    A_sel = tuple(i for i in B if classes[i] == best_label)
    return tuple(B), classes, A_sel


def random_split_operator(n: int, rng: np.random.Generator, scale: float = 1.0) -> SplitOperator:
    """Split operator with independent uniform [-scale, scale] entries."""
    return SplitOperator(rng.uniform(-scale, scale, size=(n, 2, 2)))
