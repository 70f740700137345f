"""Batch sweeps over n, growth-law fits, property suites, and reporting.

Records are deterministic given the master seed: the RNG for point or
trial t of a quantity is derived from (seed, quantity tag, t).  Fits
target log-power laws value ~ c * (ln n)^p, the shape every growth claim
in this problem takes.  Reports are CSV, JSON (schema 1), hand-written
self-contained SVG, or a matplotlib figure rendered next to the delimited
output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from dataclasses import dataclass

import numpy as np

from . import asymmetry, opnorm, summing
from .operators import random_split_operator
from .space import InputError, kp_map_batch, kp_norm_batch, quasilinearity_defect

__all__ = [
    "SweepRecord",
    "FitResult",
    "SuiteReport",
    "QUANTITIES",
    "SUITES",
    "run_sweep",
    "fit_growth",
    "check_suites",
    "emit",
    "render_figure",
]

QUANTITIES = ("pi1_l2", "pi1_linf", "id_norm", "id_inv_norm", "qlc", "asym",
              "phi", "linf_inv")
SUITES = ("norm_identities", "lemma_chain", "selection", "rank_one", "lemma_q")

CSV_COLUMNS = ("quantity", "n", "value", "direction", "seed", "wall_time_ms")
JSON_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SweepRecord:
    quantity: str
    n: int
    value: float
    direction: str  # lower | upper | point
    seed: int
    wall_time_ms: int

    def __post_init__(self):
        if self.n < 1:
            raise InputError("n must be >= 1")
        if not math.isfinite(self.value):
            raise InputError("value must be finite")


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of value ~ c * (ln n)^p."""

    c: float
    p: float
    r_squared: float


def derive_seed(master: int, tag: str, t: int) -> int:
    """Stable per-(quantity, index) seed derived from the master seed."""
    return int(np.random.SeedSequence(
        entropy=master, spawn_key=(zlib.crc32(tag.encode()), t)).generate_state(1)[0])


DEFAULT_BUDGET = {
    "trials": 2000,          # random pairs for the qlc sup
    "asym_samples": 20,
    "asym_restarts": 10,
    "asym_group": "SignedPermutations",
    "exhaustive_limit": summing.EXHAUSTIVE_LIMIT,
}


def _sweep_point(quantity: str, n: int, seed: int, budget: dict) -> tuple[float, str]:
    if quantity == "pi1_l2":
        return summing.pi1_lower_identity(n, budget["exhaustive_limit"]).ratio, "lower"
    if quantity == "pi1_linf":
        return summing.pi1_lower_linf(n, budget["exhaustive_limit"]).ratio, "lower"
    if quantity == "id_norm":
        (lb, _), _ = opnorm.identity_norms(n)
        return lb.value, "lower"
    if quantity == "id_inv_norm":
        _, (lb, _) = opnorm.identity_norms(n)
        return lb.value, "lower"
    if quantity == "qlc":
        rng = np.random.default_rng(seed)
        best = 0.0
        for _ in range(budget["trials"]):
            a = rng.standard_normal(n)
            b = rng.standard_normal(n)
            best = max(best, quasilinearity_defect(a, b))
        return best, "lower"
    if quantity == "asym":
        spec = asymmetry.GroupSpec(budget["asym_group"], 2 * n)
        report = asymmetry.asym_mc(spec, n, budget["asym_samples"],
                                   budget["asym_restarts"], seed)
        return report.estimate.mean_norm, "lower"
    if quantity == "phi":
        lb, _ = opnorm.phi_max(n)
        return lb.value, "lower"
    if quantity == "linf_inv":
        lb, _ = summing.linf_inverse_norm(n)
        return lb.value, "lower"
    raise InputError(f"unknown quantity tag {quantity!r}")


def run_sweep(quantity: str, n_list, seed: int = 0, budget: dict | None = None) -> list[SweepRecord]:
    """One record per n; deterministic given the seed (wall time aside)."""
    if quantity not in QUANTITIES:
        raise InputError(f"unknown quantity tag {quantity!r}")
    n_list = list(n_list)
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InputError("n_list must be nonempty and ascending")
    full_budget = dict(DEFAULT_BUDGET)
    full_budget.update(budget or {})
    records = []
    for t, n in enumerate(n_list):
        point_seed = derive_seed(seed, quantity, t)
        t0 = time.perf_counter()
        value, direction = _sweep_point(quantity, n, point_seed, full_budget)
        ms = int(round((time.perf_counter() - t0) * 1000))
        records.append(SweepRecord(quantity, n, value, direction, point_seed, ms))
    return records


def fit_growth(records: list[SweepRecord]) -> FitResult:
    """Fit ln(value) = p * ln(ln n) + ln(c) by least squares."""
    quantities = {r.quantity for r in records}
    if len(quantities) != 1:
        raise InputError("records must all carry the same quantity")
    pts = sorted({(r.n, r.value) for r in records})
    if len(pts) < 4:
        raise InputError("need at least 4 records with distinct n")
    ns = np.array([p[0] for p in pts], float)
    vals = np.array([p[1] for p in pts], float)
    if (vals <= 0).any() or (ns <= 1).any():
        raise InputError("fit requires positive values and n >= 2")
    x = np.log(np.log(ns))
    y = np.log(vals)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(c=float(np.exp(coef[1])), p=float(coef[0]),
                     r_squared=min(max(r2, 0.0), 1.0))


# ---------------------------------------------------------------------------
# property suites


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    trials: int
    failures: int
    first_counterexample: str | None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "failures": self.failures,
            "first_counterexample": self.first_counterexample,
            "passed": self.passed,
        }


def _suite_norm_identities(trials: int, seed: int) -> SuiteReport:
    rng = np.random.default_rng(seed)
    failures = 0
    first = None
    chunk = 2000
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        n = int(rng.integers(1, 65))
        X = rng.standard_normal((m, 2 * n))
        lam = rng.uniform(0.1, 10.0, size=m)
        base = kp_norm_batch(X)
        scaled = kp_norm_batch(lam[:, None] * X)
        bad = np.abs(scaled - lam * base) > 1e-9 * np.maximum(lam * base, 1e-300)
        # identity curve ||(F(u), u)|| = ||u||_2
        U = rng.standard_normal((m, n))
        G = np.hstack([kp_map_batch(U), U])
        curve = kp_norm_batch(G)
        un = np.linalg.norm(U, axis=1)
        bad |= np.abs(curve - un) > 1e-10 * un
        # block sign/permutation invariance
        signs = rng.choice([-1.0, 1.0], size=n)
        perm = rng.permutation(n)
        Y = np.hstack([signs * X[:, :n][:, perm], signs * X[:, n:][:, perm]])
        bad |= np.abs(kp_norm_batch(Y) - base) > 1e-12 * np.maximum(base, 1.0)
        if bad.any():
            failures += int(bad.sum())
            if first is None:
                first = f"n={n}, row={int(np.argmax(bad))}"
        done += m
    return SuiteReport("norm_identities", trials, failures, first)


def _suite_lemma_chain(trials: int, seed: int) -> SuiteReport:
    from .operators import rms_gamma_check

    rng = np.random.default_rng(seed)
    failures = 0
    first = None
    for t in range(trials):
        n = int(rng.integers(4, 129))
        T = random_split_operator(n, rng)
        k = int(rng.integers(2, n + 1))
        subset = rng.choice(n, size=k, replace=False)
        lhs, rhs = rms_gamma_check(T, subset)
        if lhs > rhs + 1e-9:
            failures += 1
            if first is None:
                first = f"trial={t}, n={n}, k={k}, lhs={lhs}, rhs={rhs}"
    return SuiteReport("lemma_chain", trials, failures, first)


def _suite_selection(trials: int, seed: int) -> SuiteReport:
    from .operators import gamma_threshold_subset, nested_selection

    rng = np.random.default_rng(seed)
    failures = 0
    first = None
    for t in range(trials):
        n = int(rng.integers(32, 257))
        T = random_split_operator(n, rng)
        M = opnorm.opnorm_upper(T).value
        k = int(rng.integers(2, n + 1))
        subset = rng.choice(n, size=k, replace=False)
        rep = gamma_threshold_subset(T, subset, M)
        ok = len(rep.output_set) >= math.ceil(k / 2)
        if ok and k > 16:
            rep2 = nested_selection(T, subset, M)
            ok = len(rep2.output_set) >= math.sqrt(k) / (2.0 * math.sqrt(2.0)) - 1.0
        if not ok:
            failures += 1
            if first is None:
                first = f"trial={t}, n={n}, k={k}"
    return SuiteReport("selection", trials, failures, first)


def random_rank_one_instance(rng: np.random.Generator):
    """Synthetic (terms, K) satisfying the rank-one selection preconditions."""
    from .operators import rank_one_selection  # noqa: F401  (kept close to its consumer)

    while True:
        m = int(rng.integers(1, 21))
        theta = rng.uniform(-2.0, 2.0, size=m)
        degenerate = rng.random(m) < 0.3
        theta[degenerate] = 1.0
        a = rng.uniform(-1.0, 1.0, size=m)
        b = rng.uniform(-1.0, 1.0, size=m)
        s = float(theta @ b)
        if abs(s) < 1e-3:
            continue
        b /= s
        K = float(np.abs(b).sum()) * (1.0 + rng.uniform(0.0, 1.0))
        return list(zip(a, b, theta)), K


def _suite_rank_one(trials: int, seed: int) -> SuiteReport:
    from .operators import rank_one_selection

    rng = np.random.default_rng(seed)
    failures = 0
    first = None
    for t in range(trials):
        terms, K = random_rank_one_instance(rng)
        detail = ""
        try:
            B, classes, A_sel = rank_one_selection(terms, K)
            sum_b = sum(terms[i][2] * terms[i][1] for i in B)
            sum_sel = sum(terms[i][2] * terms[i][1] for i in A_sel)
            ok = sum_b > 0.5 and sum_sel > 0.125
            detail = f"sums=({sum_b}, {sum_sel})"
        except Exception as exc:  # selection must not raise on valid inputs
            ok = False
            detail = repr(exc)
        if not ok:
            failures += 1
            if first is None:
                first = f"trial={t}: {detail}"
    return SuiteReport("rank_one", trials, failures, first)


def _suite_lemma_q(trials: int, seed: int) -> SuiteReport:
    rng = np.random.default_rng(seed)
    failures = 0
    first = None
    for t in range(trials):
        k = int(rng.integers(1, 17))
        rep = asymmetry.trace_duality_sandwich(
            k, trials=1, mc_samples=0, seed=int(rng.integers(2**32)),
            right_checks=0)
        if rep.left_violations:
            failures += 1
            if first is None:
                first = f"trial={t}, k={k}, slack={rep.min_left_slack}"
    return SuiteReport("lemma_q", trials, failures, first)


_SUITE_RUNNERS = {
    "norm_identities": _suite_norm_identities,
    "lemma_chain": _suite_lemma_chain,
    "selection": _suite_selection,
    "rank_one": _suite_rank_one,
    "lemma_q": _suite_lemma_q,
}


def check_suites(suite: str, trials: int, seed: int = 0) -> SuiteReport:
    """Run one named property suite and report counts."""
    if suite not in _SUITE_RUNNERS:
        raise InputError(f"unknown suite {suite!r}; choose from {SUITES}")
    if trials < 1:
        raise InputError("trials must be >= 1")
    return _SUITE_RUNNERS[suite](trials, derive_seed(seed, suite, 0))


# ---------------------------------------------------------------------------
# output


def records_to_csv(records: list[SweepRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([r.quantity, r.n, repr(r.value), r.direction, r.seed,
                         r.wall_time_ms])
    return buf.getvalue()


def records_to_json(records: list[SweepRecord]) -> str:
    obj = {
        "schema": JSON_SCHEMA_VERSION,
        "records": [
            {"quantity": r.quantity, "n": r.n, "value": r.value,
             "direction": r.direction, "seed": r.seed,
             "wall_time_ms": r.wall_time_ms}
            for r in records
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


def _fit_for(records: list[SweepRecord]) -> FitResult | None:
    distinct = {r.n for r in records}
    if len(distinct) < 4 or min(distinct) < 2 or any(r.value <= 0 for r in records):
        return None
    try:
        return fit_growth(records)
    except InputError:
        return None


def records_to_svg(records: list[SweepRecord], width: int = 640, height: int = 480) -> str:
    """Self-contained SVG: per quantity one data path over (ln n, value)
    axes plus one fitted-curve path."""
    by_quantity: dict[str, list[SweepRecord]] = {}
    for r in records:
        by_quantity.setdefault(r.quantity, []).append(r)
    xs = [math.log(r.n) for r in records]
    ys = [r.value for r in records]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 50.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    palette = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#e377c2", "#7f7f7f")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" '
        'font-size="12">ln n</text>',
    ]
    for i, (quantity, recs) in enumerate(sorted(by_quantity.items())):
        recs = sorted(recs, key=lambda r: r.n)
        color = palette[i % len(palette)]
        pts = " L".join(f"{sx(math.log(r.n)):.2f},{sy(r.value):.2f}" for r in recs)
        parts.append(f'<path d="M{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        fit = _fit_for(recs)
        if fit is not None:
            grid = np.linspace(math.log(recs[0].n), math.log(recs[-1].n), 64)
            fit_pts = " L".join(
                f"{sx(x):.2f},{sy(fit.c * x**fit.p):.2f}" for x in grid)
            parts.append(
                f'<path d="M{fit_pts}" fill="none" stroke="{color}" '
                'stroke-width="1" stroke-dasharray="4 3"/>')
        else:
            # keep the two-paths-per-quantity contract even when unfittable
            parts.append(f'<path d="M{pts}" fill="none" stroke="{color}" '
                         'stroke-width="0.5" stroke-dasharray="4 3"/>')
        parts.append(
            f'<text x="{width - pad + 4}" y="{pad + 14 * i}" font-size="11" '
            f'fill="{color}">{quantity}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit(records: list[SweepRecord], fmt: str, path: str) -> None:
    """Write records in the requested format; empty input is an error."""
    if not records:
        raise InputError("no records to emit")
    if fmt == "csv":
        payload = records_to_csv(records)
    elif fmt == "json":
        payload = records_to_json(records)
    elif fmt == "svg":
        payload = records_to_svg(records)
    else:
        raise InputError(f"unknown format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(payload)


def render_figure(records: list[SweepRecord], path: str) -> None:
    """Matplotlib rendering of the sweep with fit overlays, saved to path."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not records:
        raise InputError("no records to plot")
    by_quantity: dict[str, list[SweepRecord]] = {}
    for r in records:
        by_quantity.setdefault(r.quantity, []).append(r)
    fig, ax = plt.subplots(figsize=(7, 5))
    for quantity, recs in sorted(by_quantity.items()):
        recs = sorted(recs, key=lambda r: r.n)
        x = [math.log(r.n) for r in recs]
        y = [r.value for r in recs]
        (line,) = ax.plot(x, y, "o-", label=quantity)
        fit = _fit_for(recs)
        if fit is not None:
            grid = np.linspace(x[0], x[-1], 128)
            ax.plot(grid, fit.c * grid**fit.p, "--", color=line.get_color(),
                    label=f"{quantity} fit: {fit.c:.3g}(ln n)^{fit.p:.2f}")
    ax.set_xlabel("ln n")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
