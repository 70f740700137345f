"""Independent brute-force reference computations.

Everything here is deliberately dumb: exhaustive grids over low-dimensional
spheres, full sign enumeration, and a one-parameter scan for the extremal
map norm.  These certify the derived example values used in the tests and
cross-check the optimization code at tiny dimensions.  Cost guards are hard
errors; an oracle that silently degrades is worse than none.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .operators import SplitOperator
from .space import InputError, TwistedVector, kp_norm_batch

__all__ = ["GridSpec", "grid_opnorm", "exhaustive_signs", "two_level_phi", "write_fixtures"]

MAX_GRID_POINTS = 10**8
MAX_SIGN_VECTORS = 20


class CostGuardError(RuntimeError):
    """The requested brute-force computation exceeds the hard cost guard."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform angular grid of the l2 sphere in the given dimension."""

    dimension: int
    resolution: float  # angular spacing in radians
    domain: str = "sphere"

    def __post_init__(self):
        if self.domain != "sphere":
            raise InputError("only sphere grids are supported")
        if self.dimension > 6:
            raise InputError("sphere grids are limited to dimension <= 6")
        if self.resolution <= 0:
            raise InputError("resolution must be positive")

    def axis_points(self) -> int:
        return max(int(math.ceil(math.pi / self.resolution)), 2)

    def total_points(self) -> int:
        if self.dimension == 1:
            return 2
        L = self.axis_points()
        return L ** (self.dimension - 2) * 2 * L


def _angles_to_points(angles: np.ndarray, d: int) -> np.ndarray:
    """Spherical coordinates (m, d-1) -> unit vectors (m, d)."""
    pts = np.empty((angles.shape[0], d))
    sin_prod = np.ones(angles.shape[0])
    for i in range(d - 1):
        pts[:, i] = sin_prod * np.cos(angles[:, i])
        sin_prod = sin_prod * np.sin(angles[:, i])
    pts[:, d - 1] = sin_prod
    return pts


def _angle_chunks(axes: list[np.ndarray], chunk: int = 500_000):
    """Yield (m, len(axes)) angle arrays from the product grid, chunked
    along the first axis so memory stays bounded."""
    if len(axes) == 1:
        yield axes[0][:, None]
        return
    inner = axes[1:]
    per_first = int(np.prod([a.size for a in inner]))
    group = max(1, chunk // max(per_first, 1))
    first = axes[0]
    for i in range(0, first.size, group):
        grids = np.meshgrid(first[i:i + group], *inner, indexing="ij")
        yield np.stack([g.reshape(-1) for g in grids], axis=1)


def grid_opnorm(T: SplitOperator, grid: GridSpec, refine_levels: int = 6,
                beam: int = 5000) -> float:
    """Brute-force maximization of kp_norm(Tx)/kp_norm(x) over the sphere.

    A uniform angular grid at the stated resolution is scanned first.  The
    quasi-norm has kinks, so that pass alone only reaches linear-in-spacing
    accuracy; the best `beam` cells are therefore refined by repeatedly
    subdividing each into 3^(d-1) children at a third of the spacing and
    re-ranking, which multiplies the effective resolution by 3^levels at
    small extra cost.
    """
    d = grid.dimension
    if d != 2 * T.n:
        raise InputError("grid dimension must equal 2n")
    if grid.total_points() > MAX_GRID_POINTS:
        raise CostGuardError(
            f"{grid.total_points()} grid points exceed the {MAX_GRID_POINTS} guard")

    def ratios(angles):
        X = _angles_to_points(angles, d)
        return kp_norm_batch(T.apply_batch(X)) / kp_norm_batch(X)

    L = grid.axis_points()
    axes = [np.linspace(0.0, math.pi, L) for _ in range(d - 2)]
    axes.append(np.linspace(0.0, 2.0 * math.pi, 2 * L, endpoint=False))
    best = 0.0
    cand_angles: list[np.ndarray] = []
    cand_values: list[np.ndarray] = []
    for angles in _angle_chunks(axes):
        r = ratios(angles)
        best = max(best, float(r.max()))
        take = min(beam, r.size)
        idx = np.argpartition(r, -take)[-take:]
        cand_angles.append(angles[idx])
        cand_values.append(r[idx])
    centers = np.concatenate(cand_angles)
    values = np.concatenate(cand_values)
    keep = np.argsort(values)[::-1][:beam]
    centers = centers[keep]

    offsets = np.array(
        np.meshgrid(*([[-1.0, 0.0, 1.0]] * (d - 1)), indexing="ij")
    ).reshape(d - 1, -1).T  # (3^(d-1), d-1)
    h = math.pi / max(L - 1, 1) / 3.0
    width = beam
    for _ in range(refine_levels):
        children = (centers[:, None, :] + h * offsets[None, :, :]).reshape(-1, d - 1)
        r = ratios(children)
        best = max(best, float(r.max()))
        keep = np.argsort(r)[::-1][:width]
        centers = children[keep]
        h /= 3.0
        width = max(width // 2, 1000)  # basins merge as spacing shrinks
    return best


def exhaustive_signs(vectors: list[TwistedVector]) -> float:
    """Exact sup over all sign patterns of kp_norm of the signed sum."""
    m = len(vectors)
    if m == 0:
        raise InputError("need at least one vector")
    if m > MAX_SIGN_VECTORS:
        raise CostGuardError(f"{m} vectors exceed the {MAX_SIGN_VECTORS} guard")
    V = np.asarray([v.to_array() for v in vectors])
    signs = ((np.arange(2**m)[:, None] >> np.arange(m)) & 1) * 2.0 - 1.0
    return float(kp_norm_batch(signs @ V).max())


def two_level_phi(n: int, resolution: float = 1e-4) -> float:
    """Max of ||F(u)||_2 over unit vectors with at most two coordinate
    magnitudes, by scanning the one free parameter at the given resolution.

    A certified lower bound for the extremal map norm; at least log sqrt n
    (the uniform vector is the k = n case).
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if n == 1:
        return 0.0
    theta = np.arange(0.0, math.pi / 2.0 + resolution, resolution)
    c, s = np.cos(theta), np.sin(theta)
    best = math.log(math.sqrt(n))
    for k in range(1, n):
        lvl1 = c / math.sqrt(k)
        lvl2 = s / math.sqrt(n - k)
        term1 = np.where(lvl1 > 0, (c * np.log(np.where(lvl1 > 0, lvl1, 1.0))) ** 2, 0.0)
        term2 = np.where(lvl2 > 0, (s * np.log(np.where(lvl2 > 0, lvl2, 1.0))) ** 2, 0.0)
        best = max(best, float(np.sqrt(term1 + term2).max()))
    return best


def write_fixtures(path: str) -> list[dict]:
    """Recompute the committed oracle fixtures and write them as JSON.

    Each entry records the operation, its parameters, the value and the
    resolution used, so every derived example value is reproducible by one
    command.
    """
    fixtures = []

    single = SplitOperator(np.array([[[0.0, 0.0], [1.0, 0.0]]]))
    fixtures.append({
        "operation": "grid_opnorm",
        "params": {"blocks": single.to_json()["blocks"], "resolution": 1e-3},
        "value": grid_opnorm(single, GridSpec(2, 1e-3)),
        "resolution": 1e-3,
    })

    ident1 = SplitOperator.identity(1)
    fixtures.append({
        "operation": "grid_opnorm",
        "params": {"blocks": ident1.to_json()["blocks"], "resolution": 1e-3},
        "value": grid_opnorm(ident1, GridSpec(2, 1e-3)),
        "resolution": 1e-3,
    })

    for n in (1, 2, 4):
        fixtures.append({
            "operation": "two_level_phi",
            "params": {"n": n},
            "value": two_level_phi(n, 1e-4),
            "resolution": 1e-4,
        })

    # identity-embedding norms at n = 1 by a 1-d scan of the unit circle
    th = np.arange(0.0, 2.0 * math.pi, 1e-5)
    circle = np.stack([np.cos(th), np.sin(th)], axis=1)
    qn = kp_norm_batch(circle)
    fixtures.append({
        "operation": "circle_max_kp_norm",
        "params": {"n": 1},
        "value": float(qn.max()),
        "resolution": 1e-5,
    })
    fixtures.append({
        "operation": "circle_max_l2_over_kp_norm",
        "params": {"n": 1},
        "value": float((1.0 / qn).max()),
        "resolution": 1e-5,
    })

    # sign supremum of the 1-summing witness family at n = 4
    from .summing import witness_family_vectors  # local import to avoid a cycle

    fixtures.append({
        "operation": "exhaustive_signs",
        "params": {"family": "pi1-identity", "n": 4},
        "value": exhaustive_signs(witness_family_vectors(4)),
        "resolution": 0.0,
    })

    with open(path, "w") as fh:
        json.dump(fixtures, fh, indent=2)
        fh.write("\n")
    return fixtures
