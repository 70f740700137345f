"""Monte-Carlo symmetry measurement over compact matrix groups.

Samples orthogonal matrices from one of three groups (full Haar, signed
coordinate permutations, blockwise signed permutations), detects richness
via the numerical dimension of the commutant, averages per-sample lower
bounds of the twisted-sum operator norm, and checks the trace-duality
sandwich on the l2 operator-norm / nuclear-norm pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .opnorm import identity_norms, matrix_opnorm_lower
from .space import InputError

__all__ = [
    "GroupSpec",
    "AsymmetryEstimate",
    "AsymmetryReport",
    "SandwichReport",
    "sample_group",
    "haar_orthogonal",
    "is_rich",
    "asym_mc",
    "trace_duality_sandwich",
]

GROUP_KINDS = ("FullOrthogonal", "SignedPermutations", "BlockSignedPermutations")

#: cap on the number of sampled generators used for commutant detection
MAX_COMMUTANT_GENERATORS = 60

#: largest dimension for which the dense d^2 x d^2 commutant system is
#: built; above it the character-average route is used instead
DENSE_COMMUTANT_LIMIT = 24

#: Monte-Carlo sample floor for the character-average route
CHARACTER_SAMPLES = 2000


@dataclass(frozen=True)
class GroupSpec:
    """A sampleable compact subgroup of the 2n x 2n orthogonal matrices."""

    kind: str
    dimension: int  # 2n

    def __post_init__(self):
        if self.kind not in GROUP_KINDS:
            raise InputError(f"kind must be one of {GROUP_KINDS}")
        if self.dimension < 2 or self.dimension % 2 != 0:
            raise InputError("dimension must be even and >= 2")

    @property
    def n(self) -> int:
        return self.dimension // 2


@dataclass(frozen=True)
class AsymmetryEstimate:
    mean_norm: float
    std_error: float
    samples: int
    per_sample_method: str
    upper_envelope: float


@dataclass(frozen=True)
class AsymmetryReport:
    """AsymmetryEstimate plus the richness status of the sampled group."""

    group: str
    n: int
    estimate: AsymmetryEstimate
    rich: bool
    commutant_dim: int

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "n": self.n,
            "samples": self.estimate.samples,
            "mean_norm": self.estimate.mean_norm,
            "std_error": self.estimate.std_error,
            "upper_envelope": self.estimate.upper_envelope,
            "rich": self.rich,
            "commutant_dim": self.commutant_dim,
        }


def haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d orthogonal matrix: QR of a Gaussian matrix
    with the R diagonal forced positive."""
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def sample_group(spec: GroupSpec, seed: int) -> np.ndarray:
    """One sample of the group, always an exactly orthogonal matrix."""
    rng = np.random.default_rng(seed)
    d = spec.dimension
    if spec.kind == "FullOrthogonal":
        return haar_orthogonal(d, rng)
    if spec.kind == "SignedPermutations":
        perm = rng.permutation(d)
        signs = rng.choice([-1.0, 1.0], size=d)
        g = np.zeros((d, d))
        g[np.arange(d), perm] = signs
        return g
    n = spec.n
    block_perm = rng.permutation(n)
    block_signs = rng.choice([-1.0, 1.0], size=n)
    g = np.zeros((d, d))
    idx = np.arange(n)
    g[idx, block_perm] = block_signs            # a-slots
    g[idx + n, block_perm + n] = block_signs    # b-slots
    return g


def _finite_generators(spec: GroupSpec) -> list[np.ndarray]:
    """Exact generating sets for the two finite group kinds."""
    d = spec.dimension
    if spec.kind == "SignedPermutations":
        swap = np.eye(d)
        swap[[0, 1]] = swap[[1, 0]]
        cycle = np.roll(np.eye(d), 1, axis=0)
        flip = np.eye(d)
        flip[0, 0] = -1.0
        return [swap, cycle, flip]
    if spec.kind == "BlockSignedPermutations":
        n = spec.n
        gens = []
        flip = np.eye(d)
        flip[0, 0] = -1.0
        flip[n, n] = -1.0
        gens.append(flip)
        if n >= 2:
            swap = np.zeros((d, d))
            bp = np.arange(n)
            bp[[0, 1]] = bp[[1, 0]]
            idx = np.arange(n)
            swap[idx, bp] = 1.0
            swap[idx + n, bp + n] = 1.0
            gens.append(swap)
            cyc = np.zeros((d, d))
            bp = np.roll(np.arange(n), 1)
            cyc[idx, bp] = 1.0
            cyc[idx + n, bp + n] = 1.0
            gens.append(cyc)
        return gens
    raise InputError("no finite generators for this kind")


def is_rich(spec: GroupSpec, samples: int = 50, tol: float = 1e-8,
            seed: int = 0) -> tuple[int, bool]:
    """Numerical commutant dimension of the group, and whether it is 1.

    Stacks the linear constraints X g - g X = 0 over exact generators
    (finite kinds) or Haar samples (full orthogonal) and counts the small
    singular values of the combined system.  That system has d^2 unknowns,
    so above DENSE_COMMUTANT_LIMIT the dimension is instead estimated as
    the group average of (tr g)^2, which equals the commutant dimension by
    character orthogonality and needs no large matrices.
    """
    d = spec.dimension
    if d > DENSE_COMMUTANT_LIMIT:
        rng = np.random.default_rng(seed)
        m = max(samples, CHARACTER_SAMPLES)
        traces = np.empty(m)
        for i in range(m):
            g = sample_group(spec, int(rng.integers(2**63)))
            traces[i] = np.trace(g)
        dim = int(round(float(np.mean(traces**2))))
        return dim, dim == 1
    if spec.kind == "FullOrthogonal":
        if samples < d:
            raise InputError("need at least dimension-many samples")
        rng = np.random.default_rng(seed)
        gens = [haar_orthogonal(d, rng)
                for _ in range(min(samples, MAX_COMMUTANT_GENERATORS))]
    else:
        gens = _finite_generators(spec)
    eye = np.eye(d)
    rows = [np.kron(g.T, eye) - np.kron(eye, g) for g in gens]
    system = np.vstack(rows)
    s = np.linalg.svd(system, compute_uv=False)
    threshold = tol * s[0]
    dim = int(np.sum(s < threshold)) + max(0, d * d - s.size)
    return dim, dim == 1


def asym_mc(spec: GroupSpec, n: int, samples: int, restarts: int = 30,
            seed: int = 0, ascend_iters: int = 12) -> AsymmetryReport:
    """Monte-Carlo estimate of the Haar average of the twisted-sum operator
    norm over the group.

    Per-sample norms are witness lower bounds, so the mean under-estimates
    the true symmetry measure; the upper envelope ||I|| * ||I^-1|| is valid
    for every orthogonal sample.  Non-rich groups are flagged: their
    average says nothing about the asymmetry of the space.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    if 2 * n != spec.dimension:
        raise InputError("spec dimension must equal 2n")
    ss = np.random.SeedSequence(seed)
    sample_seeds = ss.generate_state(samples, dtype=np.uint64)
    values = np.empty(samples)
    for i in range(samples):
        g = sample_group(spec, int(sample_seeds[i]))
        est = matrix_opnorm_lower(g, restarts=restarts, seed=int(sample_seeds[i]),
                                  iters=ascend_iters, ascend_top=1)
        values[i] = est.value
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    (_, i_ub), (_, iinv_ub) = identity_norms(n)
    dim, rich = is_rich(spec)
    return AsymmetryReport(
        group=spec.kind,
        n=n,
        estimate=AsymmetryEstimate(
            mean_norm=mean,
            std_error=se,
            samples=samples,
            per_sample_method="multistart-ascent-lower",
            upper_envelope=i_ub.value * iinv_ub.value,
        ),
        rich=rich,
        commutant_dim=dim,
    )


@dataclass(frozen=True)
class SandwichReport:
    """Outcome of the trace-duality sandwich check on the l2/nuclear pair."""

    k: int
    trials: int
    left_violations: int
    min_left_slack: float
    mc_samples: int
    mc_checks: int
    right_violations: int
    min_right_margin_se: float

    @property
    def passed(self) -> bool:
        return self.left_violations == 0 and self.right_violations == 0


def trace_duality_sandwich(k: int, trials: int = 1000, mc_samples: int = 2000,
                           seed: int = 0, right_checks: int = 10) -> SandwichReport:
    """Check k <= ||S|| * nu(S^-1) <= k * E_g ||S^-1 g S|| for random S.

    alpha is the l2 operator norm, whose conjugate is the nuclear norm,
    both computed by singular values; g runs over Haar orthogonal matrices
    (so ||g^-1|| = 1).  The right inequality is statistical and is checked
    within two Monte-Carlo standard errors.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    rng = np.random.default_rng(seed)
    left_viol = 0
    min_slack = math.inf
    mats = []
    for _ in range(trials):
        S = rng.standard_normal((k, k))
        sv = np.linalg.svd(S, compute_uv=False)
        if sv[-1] < 1e-10 * sv[0]:
            continue  # skip near-singular draws
        product = sv[0] * float(np.sum(1.0 / sv))
        slack = product / k - 1.0
        min_slack = min(min_slack, slack)
        if product < k * (1.0 - 1e-8):
            left_viol += 1
        mats.append((S, product))

    right_viol = 0
    min_margin = math.inf
    checks = mats[:right_checks]
    for S, product in checks:
        Sinv = np.linalg.inv(S)
        vals = np.empty(mc_samples)
        for i in range(mc_samples):
            g = haar_orthogonal(k, rng)
            vals[i] = np.linalg.norm(Sinv @ g @ S, 2)
        mean = k * float(vals.mean())
        se = k * float(vals.std(ddof=1) / math.sqrt(mc_samples))
        margin = (mean + 2.0 * se - product) / max(se, 1e-300)
        min_margin = min(min_margin, margin)
        if mean + 2.0 * se < product:
            right_viol += 1
    return SandwichReport(
        k=k,
        trials=trials,
        left_violations=left_viol,
        min_left_slack=min_slack,
        mc_samples=mc_samples,
        mc_checks=len(checks),
        right_violations=right_viol,
        min_right_margin_se=min_margin,
    )
