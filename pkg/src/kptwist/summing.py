"""Witness constructions for summing-norm and trace-duality lower bounds.

The central object is the family x_j = (log(1/sqrt n)/sqrt n) e_j +
(1/sqrt n) f_j: every signed sum of it has quasi-norm exactly 1 (the
a-part cancels F(b) for each sign pattern), while the l2 images sum to
sqrt(n) * sqrt(1 + log(sqrt n)^2).  This gives 1-summing lower bounds for
the identity into l2^{2n} and linf^{2n}.  The trace-duality route goes
through the b-coordinate projection P and the b-slot embedding W, whose
composition with the identity is exactly the n x n identity matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .opnorm import NormEstimate, identity_norms
from .space import InputError, TwistedVector, kp_map, kp_norm, kp_norm_batch

__all__ = [
    "WitnessFamily",
    "witness_family_vectors",
    "pi1_lower_identity",
    "pi1_lower_linf",
    "gamma_inf_reduction",
    "i1_trace_lower",
    "linf_inverse_norm",
]

#: largest n for which the sign supremum is enumerated exactly (2^n patterns)
EXHAUSTIVE_LIMIT = 12

#: above the exhaustive limit, this many random sign patterns are sampled
SAMPLED_SIGNS = 10_000

#: vector lists are elided from JSON above this n to keep artifacts small
SERIALIZE_VECTOR_LIMIT = 64


@dataclass(frozen=True)
class WitnessFamily:
    """A family of twisted vectors witnessing a 1-summing lower bound."""

    vectors: list
    target: str  # "l2" | "linf"
    sign_sup: float
    ratio: float

    def to_json(self) -> dict:
        n = len(self.vectors)
        obj = {
            "target": self.target,
            "sign_sup": self.sign_sup,
            "ratio": self.ratio,
            "count": n,
        }
        if n <= SERIALIZE_VECTOR_LIMIT:
            obj["vectors"] = [v.to_json() for v in self.vectors]
        else:
            norms = [float(np.linalg.norm(v.to_array())) for v in self.vectors]
            obj["vectors"] = None
            obj["summary"] = {"l2_norm_min": min(norms), "l2_norm_max": max(norms)}
        return obj


def witness_family_vectors(n: int) -> list[TwistedVector]:
    """The n witness vectors x_j with a_j = log(1/sqrt n)/sqrt n, b_j = 1/sqrt n."""
    if n < 1:
        raise InputError("n must be >= 1")
    av = math.log(1.0 / math.sqrt(n)) / math.sqrt(n)
    bv = 1.0 / math.sqrt(n)
    out = []
    for j in range(n):
        a = np.zeros(n)
        b = np.zeros(n)
        a[j] = av
        b[j] = bv
        out.append(TwistedVector(a, b))
    return out


def _sign_sup(vectors: list[TwistedVector], exhaustive_limit: int, seed: int = 0) -> float:
    n = len(vectors)
    V = np.asarray([v.to_array() for v in vectors])
    if n <= exhaustive_limit:
        from .oracles import exhaustive_signs

        return exhaustive_signs(vectors)
    rng = np.random.default_rng(seed)
    best = 0.0
    structured = np.stack([
        np.ones(n),
        np.where(np.arange(n) % 2 == 0, 1.0, -1.0),
    ])
    best = float(kp_norm_batch(structured @ V).max())
    chunk = 1000
    for start in range(0, SAMPLED_SIGNS, chunk):
        m = min(chunk, SAMPLED_SIGNS - start)
        signs = rng.choice([-1.0, 1.0], size=(m, n))
        best = max(best, float(kp_norm_batch(signs @ V).max()))
    return best


def pi1_lower_identity(n: int, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> WitnessFamily:
    """1-summing lower bound for the identity into l2^{2n}.

    ratio = sum_j ||x_j||_2 / sign_sup = sqrt(n) * sqrt(1 + log(sqrt n)^2),
    since every signed sum has quasi-norm exactly 1.
    """
    vectors = witness_family_vectors(n)
    sign_sup = _sign_sup(vectors, exhaustive_limit)
    total = sum(float(np.linalg.norm(v.to_array())) for v in vectors)
    return WitnessFamily(vectors, "l2", sign_sup, total / sign_sup)


def pi1_lower_linf(n: int, exhaustive_limit: int = EXHAUSTIVE_LIMIT) -> WitnessFamily:
    """Same family measured in linf^{2n}: each image has sup-norm
    max(log sqrt n, 1)/sqrt n."""
    vectors = witness_family_vectors(n)
    sign_sup = _sign_sup(vectors, exhaustive_limit)
    total = sum(float(np.abs(v.to_array()).max()) for v in vectors)
    return WitnessFamily(vectors, "linf", sign_sup, total / sign_sup)


def b_projection_matrix(n: int) -> np.ndarray:
    """P: pick the b-coordinates; norm 1 from the twisted sum to l2^n."""
    return np.hstack([np.zeros((n, n), dtype=int), np.eye(n, dtype=int)])


def b_embedding_matrix(n: int) -> np.ndarray:
    """W: embed l2^n into the b-slots of l2^{2n}; l2 norm 1."""
    return np.vstack([np.zeros((n, n), dtype=int), np.eye(n, dtype=int)])


@dataclass(frozen=True)
class TraceCertificate:
    """Exact trace certificate for the factorization P o I^-1 o W = id."""

    trace: int
    product_is_identity: bool
    note: str


class ConsistencyError(RuntimeError):
    """An exact internal identity failed to hold."""


def gamma_inf_reduction(n: int) -> TraceCertificate:
    """Materialize P * I^-1 * W, check it is exactly the n x n identity, and
    return its trace.

    The classical sqrt(n) growth of the L-infinity factorization norm of the
    l2^n identity is carried as a note only; it is cited, not computed.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    P = b_projection_matrix(n)
    W = b_embedding_matrix(n)
    product = P @ np.eye(2 * n, dtype=int) @ W
    if not np.array_equal(product, np.eye(n, dtype=int)):
        raise ConsistencyError("P * I^-1 * W is not the identity")
    return TraceCertificate(
        trace=int(np.trace(product)),
        product_is_identity=True,
        note="gamma_inf(id_l2^n) ~ sqrt(n), cited asymptotic, not computed",
    )


def i1_trace_lower(n: int) -> float:
    """Trace-duality lower bound trace(P I^-1 W)/||W||_2 = n for the integral
    norm of the identity from l2^{2n} back into the twisted sum."""
    cert = gamma_inf_reduction(n)
    w_norm = float(np.linalg.norm(b_embedding_matrix(n).astype(float), 2))
    return cert.trace / w_norm


def linf_inverse_norm(n: int) -> tuple[NormEstimate, NormEstimate]:
    """Bounds for the norm of the identity from linf^{2n} into the twisted sum.

    Lower: box-extremal witness b = all-ones, a_j in {-1, +1} chosen
    coordinatewise to maximize |a_j - F(b)_j|.  Upper: box containment in
    the l2 ball of radius sqrt(2n) composed with the l2 -> Z bound.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    b = np.ones(n)
    fb = kp_map(b)
    a = np.where(fb > 0, -1.0, 1.0)
    witness = TwistedVector(a, b)
    lower = NormEstimate(kp_norm(witness), "lower", witness, "box-witness")
    _, (_, iinv_ub) = identity_norms(n)
    upper = NormEstimate(
        math.sqrt(2.0 * n) * iinv_ub.value, "upper", None,
        "box-in-l2-ball(heuristic-phi)")
    return lower, upper
