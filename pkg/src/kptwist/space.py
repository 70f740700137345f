"""The Kalton-Peck twisted sum of two copies of l2^n at a fixed dimension.

A point of the space is a pair (a, b) of real n-vectors, carrying the
quasi-norm

    ||(a, b)|| = ||b||_2 + ||a - F(b)||_2,

where F is the componentwise map b_j -> b_j * log(|b_j| / ||b||_2).
All logarithms are natural and the 0 * log 0 terms are read as 0, so that
F(0) = 0 and the quasi-norm of (a, 0) reduces to ||a||_2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TwistedVector",
    "kp_map",
    "kp_map_batch",
    "kp_norm",
    "kp_norm_batch",
    "quasilinearity_defect",
    "block_symmetry_apply",
]


class InputError(ValueError):
    """Raised when an argument fails validation (non-finite, wrong shape...)."""


@dataclass(frozen=True)
class TwistedVector:
    """A point (a, b) of R^n x R^n carrying the twisted-sum quasi-norm."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape or a.size < 1:
            raise InputError("a and b must be 1-d arrays of equal length >= 1")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise InputError("entries must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.size

    def to_array(self) -> np.ndarray:
        """Flat length-2n array, a-slots first."""
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_array(cls, x: np.ndarray) -> "TwistedVector":
        x = np.asarray(x, dtype=float)
        n = x.size // 2
        return cls(x[:n], x[n:])

    def to_json(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "TwistedVector":
        return cls(np.asarray(obj["a"], float), np.asarray(obj["b"], float))


def kp_map(b: np.ndarray) -> np.ndarray:
    """The Kalton-Peck quasi-linear map, componentwise b_j log(|b_j|/||b||_2).

    Positively homogeneous; zero entries map to zero and F(0) = 0.
    """
    b = np.asarray(b, dtype=float)
    if not np.isfinite(b).all():
        raise InputError("entries must be finite")
    return kp_map_batch(b[None, :])[0]


def kp_map_batch(B: np.ndarray, r: np.ndarray | None = None) -> np.ndarray:
    """Row-wise kp_map for a (m, n) batch; r optionally precomputed row norms."""
    B = np.asarray(B, dtype=float)
    if r is None:
        r = np.linalg.norm(B, axis=1)
    out = np.zeros_like(B)
    mask = (B != 0.0) & (r[:, None] > 0.0)
    if mask.any():
        vals = np.abs(B[mask]) / np.broadcast_to(r[:, None], B.shape)[mask]
        # the quotient can underflow to a subnormal (or zero) for extremely
        # tiny entries; switch to the cancellation-prone but finite
        # log-difference form only there
        tiny = vals < np.finfo(float).tiny
        logs = np.empty_like(vals)
        logs[~tiny] = np.log(vals[~tiny])
        if tiny.any():
            rr = np.broadcast_to(r[:, None], B.shape)[mask]
            logs[tiny] = np.log(np.abs(B[mask][tiny])) - np.log(rr[tiny])
        out[mask] = B[mask] * logs
    return out


def kp_norm(x: TwistedVector) -> float:
    """Quasi-norm ||b||_2 + ||a - F(b)||_2 of a twisted vector."""
    return float(kp_norm_batch(x.to_array()[None, :])[0])


def kp_norm_batch(X: np.ndarray) -> np.ndarray:
    """Row-wise quasi-norm for a (m, 2n) batch, a-slots in the first half."""
    X = np.asarray(X, dtype=float)
    n = X.shape[1] // 2
    a = X[:, :n]
    b = X[:, n:]
    r = np.linalg.norm(b, axis=1)
    fb = kp_map_batch(b, r)
    return r + np.linalg.norm(a - fb, axis=1)


def quasilinearity_defect(a: np.ndarray, b: np.ndarray) -> float:
    """||F(a+b) - F(a) - F(b)||_2 / (||a||_2 + ||b||_2).

    The supremum of this ratio over all pairs is the quasi-linearity
    constant of the map; it is finite but has no published numerical value,
    so it is only ever measured empirically.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InputError("a and b must have the same length")
    denom = np.linalg.norm(a) + np.linalg.norm(b)
    if denom == 0.0:
        raise InputError("defect ratio undefined when both inputs are zero")
    num = np.linalg.norm(kp_map(a + b) - kp_map(a) - kp_map(b))
    return float(num / denom)


def block_symmetry_apply(x: TwistedVector, signs: np.ndarray, perm: np.ndarray) -> TwistedVector:
    """Apply a block sign-flip and block permutation; an exact isometry.

    signs[j] multiplies both a_j and b_j; perm relabels the blocks
    (output block j is input block perm[j]).
    """
    signs = np.asarray(signs, dtype=float)
    perm = np.asarray(perm, dtype=int)
    if signs.size != x.n or perm.size != x.n:
        raise InputError("signs and perm must have length n")
    return TwistedVector(signs * x.a[perm], signs * x.b[perm])
