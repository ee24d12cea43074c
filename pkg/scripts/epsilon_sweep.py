"""Reduced-scale regret checks across exploration rates.

For each epsilon, runs the reduced 3x3 experiment and reports the final
exploitation regret per step, matching success over the last three epochs and
the sublinearity witness (final regret against the first-epoch rate
extrapolated to the full horizon).

    python3 scripts/epsilon_sweep.py --eps 1e-4 0.01 0.05 0.1 --replications 10
"""
from __future__ import annotations

import argparse
import json
from dataclasses import replace

import numpy as np

from robust_mpmab.harness import figure1_spec, run_replications
from robust_mpmab.metrics import optimal_matching


def criteria(rep) -> dict:
    cfg = rep.spec.system
    J1 = optimal_matching(cfg.means).J1
    final, first, success, all_content = [], [], [], []
    for run in rep.runs:
        recs = {r.epoch: r for r in run.ledger.epochs}
        last = recs[cfg.epochs]
        final.append((last.regret_end - last.regret_exploit_start) / last.exploitation_steps)
        first.append(recs[1].regret_end / recs[1].t_end)
        success += [recs[e].matching_success for e in range(cfg.epochs - 2, cfg.epochs + 1)]
        all_content.append(sum(int(np.sum(c)) for c in run.counters.values()))
    total_t = float(np.mean([r.ledger.t for r in rep.runs]))
    return {
        "epsilon": cfg.epsilon,
        "final_exploit_regret_per_step": float(np.mean(final)),
        "limit": 0.05 * J1,
        "matching_success_last3": float(np.mean(success)),
        "final_regret": float(np.mean([r.ledger.cumulative_regret for r in rep.runs])),
        "extrapolated_first_epoch": float(np.mean(first)) * total_t,
        "mean_content_counter_total": float(np.mean(all_content)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2])
    ap.add_argument("--replications", type=int, default=10)
    ap.add_argument("--no-adversary", action="store_true")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args(argv)
    rows = []
    for eps in args.eps:
        spec = figure1_spec("reduced", not args.no_adversary, args.replications)
        spec = replace(spec, system=replace(spec.system, epsilon=eps))
        row = criteria(run_replications(spec, workers=args.workers))
        rows.append(row)
        print(json.dumps(row), flush=True)
    return rows


if __name__ == "__main__":
    main()
