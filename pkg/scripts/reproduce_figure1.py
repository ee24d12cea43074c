"""Regret-versus-time on the 3x3 instance, with and without the adversary.

Writes ``<out>/{adversary,no_adversary}/{regret.csv,summary.json}``.

    python3 scripts/reproduce_figure1.py --scale reduced --out results/figure1
"""
from __future__ import annotations

import argparse
from pathlib import Path

from robust_mpmab.harness import reproduce_figure1


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", choices=("paper", "reduced"), default="reduced")
    ap.add_argument("--out", default="results/figure1")
    ap.add_argument("--replications", type=int, default=None)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)
    for label, attacked in (("adversary", True), ("no_adversary", False)):
        rep = reproduce_figure1(args.scale, Path(args.out) / label, args.workers, attacked, args.replications)
        s = rep.summary()
        print(f"{label}: final regret {s['final_cum_regret_mean']:.1f} +- {s['final_cum_regret_std']:.1f}, "
              f"W_mean {s['W_mean']}")


if __name__ == "__main__":
    main()
