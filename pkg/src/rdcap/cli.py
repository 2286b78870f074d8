"""Command-line front end.

Subcommands: sweep, flood, solve-lambda, classify, fit.  Exit codes:
0 success, 1 validation error (bad config/arguments), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from .analysis import classify_regime, fit_exponent
from .config import NetworkConfig, TauModel
from .errors import RdcapError
from .flood import run_concurrent_floods
from .gmodel import GModel
from .harness import (ExperimentSpec, experiment_spec_from_text, run_sweep,
                      scenario_presets)
from .rates import solve_lambda
from .topology import place_nodes


def _cmd_sweep(args) -> int:
    spec = experiment_spec_from_text(Path(args.spec).read_text())
    if args.workers is not None:
        spec.workers = args.workers
    if args.out is not None:
        spec.output_dir = args.out
    record = run_sweep(spec, progress=lambda msg: print(msg, file=sys.stderr))
    print(json.dumps({
        "spec_hash": record.spec_hash,
        "points": len(record.rows),
        "failures": record.failures,
        "fits": {k: v.slope for k, v in record.fits.items()},
        "regime": record.verdict.regime if record.verdict else None,
        "output_dir": spec.output_dir,
    }, indent=2))
    return 0


def _cmd_flood(args) -> int:
    config = NetworkConfig(n=args.n, area_coeff=args.ca, seed=args.seed)
    placement = place_nodes(config)
    rng_origins = min(args.origins, args.n)
    origins = list(range(rng_origins))
    budget = max(64, 8 * args.n)
    _, stats = run_concurrent_floods(origins, placement, config, budget)
    print(json.dumps(asdict(stats), indent=2))
    return 0


def _qprime_from_arg(text: str):
    """Constant in [0,1], or a whitespace-separated (lambda, q) table file."""
    try:
        const = float(text)
    except ValueError:
        const = None
    if const is not None:
        if not 0 <= const <= 1:
            raise RdcapError(f"constant Q' {const} outside [0, 1]")
        return lambda lam: const
    rows = []
    for line in Path(text).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        lam_s, q_s = line.split()
        rows.append((float(lam_s), float(q_s)))
    rows.sort()
    xs = [r[0] for r in rows]
    ys = [r[1] for r in rows]
    if len(rows) < 2:
        raise RdcapError("Q' table needs at least 2 rows")

    def table_q(lam: float) -> float:
        if lam <= xs[0]:
            return ys[0]
        if lam >= xs[-1]:
            return ys[-1]
        import bisect
        i = bisect.bisect_right(xs, lam)
        t = (lam - xs[i - 1]) / (xs[i] - xs[i - 1])
        return ys[i - 1] + t * (ys[i] - ys[i - 1])

    return table_q


def _cmd_solve_lambda(args) -> int:
    q_prime = _qprime_from_arg(args.qprime)
    lam = solve_lambda(args.n, args.nu, args.tau, q_prime)
    print(repr(lam))
    return 0


def _cmd_classify(args) -> int:
    if args.scenario in ("example1", "example2", "example3"):
        tau_model, g_factory = scenario_presets(args.scenario)
    else:
        spec = experiment_spec_from_text(Path(args.scenario).read_text())
        tau_model, g_factory = spec.models()
    if args.n_max < 100 * args.n_min:
        raise RdcapError("--n-max must be >= 100 * --n-min (two decades)")
    k = 6
    ratio = (args.n_max / args.n_min) ** (1.0 / (k - 1))
    probes = sorted({int(round(args.n_min * ratio ** i)) for i in range(k)})
    verdict = classify_regime(tau_model, g_factory, probes)
    print(json.dumps(verdict.to_dict(), indent=2))
    return 0


def _cmd_fit(args) -> int:
    lines = Path(args.csv).read_text().splitlines()
    header = [h.strip() for h in lines[0].split(",")]
    for col in (args.x, args.y):
        if col not in header:
            raise RdcapError(f"column {col!r} not in {args.csv}")
    xi, yi = header.index(args.x), header.index(args.y)
    points = []
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = line.split(",")
        x, y = float(cells[xi]), float(cells[yi])
        if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y):
            points.append((x, y))
    fit = fit_exponent(points)
    print(json.dumps({"slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": fit.r_squared,
                      "slope_stderr": fit.slope_stderr,
                      "points": fit.points}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdcap",
        description="Ad hoc network capacity simulator and analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an experiment sweep from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("flood", help="standalone flood statistics as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ca", type=float, default=16.0,
                   help="reception-area coefficient (a = min(1, ca/n))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--origins", type=int, default=1)
    p.set_defaults(func=_cmd_flood)

    p = sub.add_parser("solve-lambda", help="solve the arrival-rate fixed point")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--qprime", required=True,
                   help="constant in [0,1] or a 'lambda q' table file")
    p.set_defaults(func=_cmd_solve_lambda)

    p = sub.add_parser("classify", help="classify the throughput regime")
    p.add_argument("--scenario", required=True,
                   help="example1|example2|example3 or an experiment file")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("fit", help="power-law fit of one CSV column vs another")
    p.add_argument("--csv", required=True)
    p.add_argument("--x", default="n")
    p.add_argument("--y", default="throughput_per_node")
    p.set_defaults(func=_cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RdcapError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
