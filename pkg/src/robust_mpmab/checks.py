"""Oracle-versus-simulator checks on the two-player, two-arm fixture."""
from __future__ import annotations

import numpy as np

from .adversary import IidSingleArm, NoAdversary, attack_marginal
from .comms import BitBus
from .matching import MatchParams, run_matching_phase
from .model import DeterministicRewards, SystemConfig
from .oracle import (EPS_GRID, aligned_state, build_chain, classify_p0, resistance_probe,
                     stationary_distribution, total_variation)

FIXTURE_MEANS = np.array([[0.9, 0.2], [0.3, 0.8]])
FIXTURE_KAPPA = 3.0
FIXTURE_BETA = 2.0


def simulated_occupancy(chain, means, tau: int, seed: int, adversary=None) -> np.ndarray:
    """Fraction of rounds the simulator spends in each chain state (state after each round).

    ``means`` serve both as true means and as the players' estimates.
    """
    K, M, epsilon = chain.K, chain.M, chain.epsilon
    cfg = SystemConfig(K=K, M=M, means=means, reward_model=DeterministicRewards(),
                       epsilon=epsilon, kappa=chain.kappa, beta=chain.beta)
    params = MatchParams(epsilon, chain.kappa, chain.beta, tau, M, chain.sync_snapshot)
    counts = np.zeros(len(chain.state_list))

    def tally(t, states):
        counts[chain.index[tuple(s.key() for s in states)]] += 1

    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
    run_matching_phase(cfg, means, params, adversary or NoAdversary(), BitBus(K),
                       rngs[0], rngs[1], rngs[2], on_round=tally)
    return counts / counts.sum()


def oracle_report(epsilons=(0.1, 0.03, 0.01), attack_p: float = 0.3, simulate_tau: int = 0,
                  simulate_eps: float = 0.05, seed: int = 0) -> dict:
    """Classification, stationary concentration and resistance slopes on the 2x2 fixture."""
    est = FIXTURE_MEANS
    optimal = aligned_state(est, (0, 1))
    zd = ((0, 0.0, False), (1, 0.0, False))
    collapsed = ((1, 0.0, False), (1, 0.8, False))

    def build(eps, marginal=None):
        return build_chain(est, 2, 2, eps, FIXTURE_KAPPA, FIXTURE_BETA, marginal)

    p0 = classify_p0(build(0.0))
    report = {
        "fixture_means": est.tolist(),
        "kappa": FIXTURE_KAPPA,
        "beta": FIXTURE_BETA,
        "classification": {
            "all_content_absorbing": p0.all_content_absorbing,
            "all_discontent_closed": p0.all_discontent_closed,
            "mixed_transient": p0.mixed_transient,
            "n_absorbing": len(p0.absorbing_states),
            "n_closed_classes": len(p0.closed_classes),
            "n_transient": len(p0.transient_states),
        },
        "stationary_mass_optimal": {},
    }
    marginal = attack_marginal(IidSingleArm(attack_p), 2)
    for label, m in (("no_adversary", None), (f"iid_single_arm_p{attack_p}", marginal)):
        rows = []
        for eps in epsilons:
            chain = build(eps, m)
            pi = stationary_distribution(chain)
            top = chain.state_list[int(np.argmax(pi))]
            rows.append({"epsilon": eps, "mass": float(pi[chain.index[optimal]]),
                         "argmax_is_optimal": top == optimal})
        report["stationary_mass_optimal"][label] = rows
    report["resistance"] = {
        "grid": list(EPS_GRID),
        "zD_to_optimal": resistance_probe(build, zd, optimal),
        "zD_to_optimal_expected": float(sum(1 - est[k, a] for k, a in enumerate((0, 1)))),
        "optimal_collapse_to_zD": resistance_probe(build, optimal, collapsed),
        "optimal_collapse_expected": FIXTURE_KAPPA,
    }
    if simulate_tau:
        chain = build(simulate_eps)
        occ = simulated_occupancy(chain, est, simulate_tau, seed)
        report["simulator_agreement"] = {
            "epsilon": simulate_eps, "tau": simulate_tau,
            "total_variation": total_variation(occ, stationary_distribution(chain)),
        }
    return report
