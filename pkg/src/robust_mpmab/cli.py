"""Command-line entry point: ``robust-mpmab {validate,run,replicate,figure1,oracle-check}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness
from .checks import oracle_report
from .errors import MPMABError


def _load(args):
    return harness.parse_spec(args.spec)


def cmd_validate(args) -> int:
    spec = _load(args)
    print(f"ok: K={spec.system.K} M={spec.system.M} epochs={spec.system.epochs} "
          f"adversary={type(spec.adversary).__name__}")
    return 0


def cmd_run(args) -> int:
    spec = _load(args)
    changes = {}
    if args.trace:
        changes["trace"] = True
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    spec = harness.validate_spec(replace(spec, **changes))
    result = harness.run_single(spec, args.seed)
    summary = harness.write_run(args.out, spec, result)
    print(f"regret {summary['cumulative_regret']:.3f} over {summary['total_steps']} steps -> {args.out}")
    return 0


def cmd_replicate(args) -> int:
    spec = _load(args)
    if args.replications is not None:
        spec = harness.validate_spec(replace(spec, replications=args.replications))
    rep = harness.run_replications(spec, workers=args.workers)
    summary = harness.write_replications(args.out, rep)
    print(f"mean final regret {summary['final_cum_regret_mean']:.3f} ({len(rep.runs)} runs) -> {args.out}")
    return 0


def cmd_figure1(args) -> int:
    rep = harness.reproduce_figure1(args.scale, args.out, args.workers, not args.no_adversary, args.replications)
    summary = rep.summary()
    print(f"figure1 ({args.scale}): mean final regret {summary['final_cum_regret_mean']:.3f} -> {args.out}")
    return 0


def cmd_oracle_check(args) -> int:
    report = oracle_report(simulate_tau=args.simulate_tau, seed=args.seed)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-mpmab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a spec file")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="single run; writes regret.csv and summary.json")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None, help="defaults to base_seed")
    p.add_argument("--trace", action="store_true", help="also write trace.csv")
    p.add_argument("--horizon", type=int, default=None, help="stop after this many steps")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replicate", help="Monte-Carlo replications with aggregated regret")
    p.add_argument("spec")
    p.add_argument("--out", required=True)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help=f"default: ${harness.WORKERS_ENV} or 1")
    p.set_defaults(func=cmd_replicate)

    p = sub.add_parser("figure1", help="regret-vs-time experiment on the 3x3 instance")
    p.add_argument("--scale", choices=("paper", "reduced"), default="reduced")
    p.add_argument("--out", required=True)
    p.add_argument("--no-adversary", action="store_true")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("oracle-check", help="exact Markov-chain checks on the 2x2 fixture")
    p.add_argument("--out", default=None)
    p.add_argument("--simulate-tau", type=int, default=0, help="also compare simulator occupancy")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except MPMABError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
