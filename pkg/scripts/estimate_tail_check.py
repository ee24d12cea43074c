"""Empirical estimate-error frequency after exploration against the analytic tail bound.

    python3 scripts/estimate_tail_check.py --T0 200 --runs 2000 --p 0.4
"""
from __future__ import annotations

import argparse
import json

import numpy as np

from robust_mpmab.adversary import IidSingleArm
from robust_mpmab.comms import BitBus
from robust_mpmab.exploration import ExplorationState, finalize_estimates, run_exploration_phase
from robust_mpmab.harness import bundled_spec
from robust_mpmab.metrics import estimate_tail_bound, optimal_matching


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T0", type=int, default=200)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--p", type=float, default=0.4)
    ap.add_argument("--epoch", type=int, default=1)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    spec = bundled_spec("figure1_reduced").with_system(T0=args.T0)
    cfg = spec.system
    opt = optimal_matching(cfg.means)
    pair_hits = np.zeros((cfg.K, cfg.M))
    any_hits = 0
    for child in np.random.SeedSequence(args.seed).spawn(args.runs):
        r_reward, r_adv = (np.random.default_rng(s) for s in child.spawn(2))
        state = ExplorationState(cfg.K, cfg.M)
        for epoch in range(1, args.epoch + 1):
            run_exploration_phase(cfg, epoch, state, IidSingleArm(args.p), BitBus(cfg.K), r_reward, r_adv)
        off = np.abs(finalize_estimates(state) - cfg.means) >= opt.Delta
        pair_hits += off
        any_hits += off.any()
    print(json.dumps({
        "runs": args.runs, "Delta": opt.Delta,
        "any_pair_frequency": any_hits / args.runs,
        "max_pair_frequency": float(pair_hits.max() / args.runs),
        "bound_per_pair": estimate_tail_bound(cfg.T0, opt.Delta, cfg.delta_exp, args.epoch),
        "bound_union": estimate_tail_bound(cfg.T0, opt.Delta, cfg.delta_exp, args.epoch, cfg.K * cfg.M),
    }, indent=2))


if __name__ == "__main__":
    main()
