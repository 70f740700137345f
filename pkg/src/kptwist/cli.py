"""Command line driver.

Subcommands: norm (evaluate the quasi-norm of a vector), sweep (run a
quantity over a list of n and write CSV/JSON/SVG plus an optional
matplotlib figure), check (property suites; exit code 0 iff all pass),
oracle (regenerate the brute-force fixtures file), asym (Monte-Carlo
symmetry report).  A simple key = value config file can override flags.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import asymmetry, oracles, sweep
from .space import TwistedVector, kp_norm


def parse_config(path: str) -> dict:
    """key = value lines; '#' starts a comment; values stay strings."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    overrides = parse_config(args.config)
    for key, value in overrides.items():
        if not hasattr(args, key):
            raise SystemExit(f"config key {key!r} is not a recognized option")
        current = getattr(args, key)
        if isinstance(current, bool):
            value = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(args, key, value)
    return args


def _parse_n_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kptwist")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--format", default="csv", choices=["csv", "json", "svg"])
        p.add_argument("--config", default=None, help="key = value config file")

    p_norm = sub.add_parser("norm", help="quasi-norm of a twisted vector")
    common(p_norm)
    p_norm.add_argument("vector", help="JSON file with {\"a\": [...], \"b\": [...]}, or - for stdin")

    p_sweep = sub.add_parser("sweep", help="run one quantity over a list of n")
    common(p_sweep)
    p_sweep.add_argument("--quantity", required=True, choices=sweep.QUANTITIES)
    p_sweep.add_argument("--n", required=True, help="comma-separated ascending list, e.g. 4,16,64")
    p_sweep.add_argument("--plot", default=None, help="also render a matplotlib figure here")
    p_sweep.add_argument("--group", default="SignedPermutations",
                         choices=asymmetry.GROUP_KINDS)
    p_sweep.add_argument("--samples", type=int, default=20)
    p_sweep.add_argument("--restarts", type=int, default=10)
    p_sweep.add_argument("--trials", type=int, default=2000)

    p_check = sub.add_parser("check", help="run property suites")
    common(p_check)
    p_check.add_argument("--suite", default="all",
                         choices=list(sweep.SUITES) + ["all"])
    p_check.add_argument("--trials", type=int, default=1000)

    p_oracle = sub.add_parser("oracle", help="regenerate brute-force fixtures")
    common(p_oracle)

    p_asym = sub.add_parser("asym", help="Monte-Carlo symmetry report")
    common(p_asym)
    p_asym.add_argument("--group", default="SignedPermutations",
                        choices=asymmetry.GROUP_KINDS)
    p_asym.add_argument("--n", type=int, required=True)
    p_asym.add_argument("--samples", type=int, default=50)
    p_asym.add_argument("--restarts", type=int, default=20)
    return parser


def cmd_norm(args) -> int:
    if args.vector == "-":
        obj = json.load(sys.stdin)
    else:
        with open(args.vector) as fh:
            obj = json.load(fh)
    value = kp_norm(TwistedVector.from_json(obj))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"schema": sweep.JSON_SCHEMA_VERSION, "kp_norm": value}, fh)
            fh.write("\n")
    print(value)
    return 0


def cmd_sweep(args) -> int:
    budget = {
        "asym_group": args.group,
        "asym_samples": args.samples,
        "asym_restarts": args.restarts,
        "trials": args.trials,
    }
    records = sweep.run_sweep(args.quantity, _parse_n_list(args.n), args.seed, budget)
    out = args.out or f"{args.quantity}.{args.format}"
    sweep.emit(records, args.format, out)
    if args.plot:
        sweep.render_figure(records, args.plot)
    print(f"wrote {len(records)} records to {out}")
    return 0


def cmd_check(args) -> int:
    suites = list(sweep.SUITES) if args.suite == "all" else [args.suite]
    reports = [sweep.check_suites(s, args.trials, args.seed) for s in suites]
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} {rep.suite}: {rep.trials} trials, {rep.failures} failures")
        if rep.first_counterexample:
            print(f"    first counterexample: {rep.first_counterexample}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"schema": sweep.JSON_SCHEMA_VERSION,
                       "suites": [r.to_json() for r in reports]}, fh, indent=2)
            fh.write("\n")
    return 0 if all(r.passed for r in reports) else 1


def cmd_oracle(args) -> int:
    out = args.out or "oracle_fixtures.json"
    fixtures = oracles.write_fixtures(out)
    print(f"wrote {len(fixtures)} fixtures to {out}")
    return 0


def cmd_asym(args) -> int:
    spec = asymmetry.GroupSpec(args.group, 2 * args.n)
    report = asymmetry.asym_mc(spec, args.n, args.samples, args.restarts, args.seed)
    payload = dict(report.to_json(), schema=sweep.JSON_SCHEMA_VERSION)
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(text, end="")
    return 0


COMMANDS = {
    "norm": cmd_norm,
    "sweep": cmd_sweep,
    "check": cmd_check,
    "oracle": cmd_oracle,
    "asym": cmd_asym,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args = _apply_config(args)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
