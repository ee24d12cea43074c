"""Payoff-based matching dynamics with one-bit mood synchronisation.

Each player carries a baseline action, a baseline utility and a mood. A
content player repeats its baseline except with probability ``eps**kappa``;
a discontent player picks uniformly. Playing the baseline while content never
changes the state, whatever the reward, so attacks cannot knock a settled
player out. Any other play resets the baseline to what was just played and
makes the player content with probability ``eps**(1 - u)``. A one-bit mood
broadcast then lets a single discontent player pull the others out of
contentment, with survival probability ``eps**beta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adversary import Phase, PhaseTag, next_attack
from .comms import BitBus
from .metrics import OptimalMatching, RegretLedger, step_regret
from .model import SystemConfig, sample_step

CONTENT = True
DISCONTENT = False
U_MAX = 1.0 - 1e-6
SNAPSHOTS = ("post_update", "pre_update")


@dataclass(frozen=True)
class PlayerMatchState:
    baseline_action: int
    baseline_utility: float
    content: bool

    def key(self) -> tuple:
        return (self.baseline_action, self.baseline_utility, self.content)


@dataclass(frozen=True)
class MatchParams:
    epsilon: float
    kappa: float
    beta: float
    tau: int
    M: int
    sync_snapshot: str = "post_update"

    def __post_init__(self):
        if self.sync_snapshot not in SNAPSHOTS:
            raise ValueError(f"sync_snapshot must be one of {SNAPSHOTS}")

    @classmethod
    def from_config(cls, config: SystemConfig, epoch: int, sync_snapshot: str = "post_update"):
        return cls(config.epsilon, config.kappa, config.beta, config.tau(epoch), config.M, sync_snapshot)


def initial_state(M: int, rng: np.random.Generator) -> PlayerMatchState:
    return PlayerMatchState(int(rng.integers(M)), 0.0, DISCONTENT)


def choose_action(state: PlayerMatchState, params: MatchParams, rng: np.random.Generator) -> int:
    M = params.M
    if not state.content:
        return int(rng.integers(M))
    if M == 1 or rng.random() >= params.epsilon**params.kappa:
        return state.baseline_action
    # uniform over the other M - 1 arms
    a = int(rng.integers(M - 1))
    return a + (a >= state.baseline_action)


def utility(reward: float, estimates, k: int, arm: int) -> float:
    if reward <= 0:
        return 0.0
    return float(min(max(estimates[k][arm], 0.0), U_MAX))


def update_state(state: PlayerMatchState, action: int, u: float, params: MatchParams, rng) -> PlayerMatchState:
    if state.content and action == state.baseline_action:
        return state
    mood = rng.random() < params.epsilon ** (1.0 - u)
    return PlayerMatchState(action, u, bool(mood))


def synchronize_mood(state: PlayerMatchState, observed, params: MatchParams, rng) -> PlayerMatchState:
    """Apply the mood broadcast; ``observed`` holds one bit per player, 1 = content."""
    if not state.content:
        return state
    if np.all(observed):
        return state
    if rng.random() < params.epsilon**params.beta:
        return state
    return PlayerMatchState(state.baseline_action, state.baseline_utility, DISCONTENT)


def run_matching_phase(
    config: SystemConfig,
    estimates,
    params: MatchParams,
    adversary,
    bus: BitBus,
    rng_players: np.random.Generator,
    rng_reward: np.random.Generator,
    rng_adv: np.random.Generator,
    epoch: int = 1,
    ledger: RegretLedger | None = None,
    opt: OptimalMatching | None = None,
    states: list | None = None,
    trace: list | None = None,
    on_round=None,
):
    """Run ``params.tau`` lockstep rounds and return the content counters and final states.

    ``counters[k, m]`` counts rounds in which player ``k`` played ``m`` while
    content (mood in force when the action was chosen). ``trace`` receives
    ``(epoch, t, player, action, utility, content, baseline_action)`` tuples;
    ``on_round(t, states)`` is called with the joint state after every round.
    """
    K, M = config.K, config.M
    tag = PhaseTag(Phase.MATCHING, epoch)
    if states is None:
        states = [initial_state(M, rng_players) for _ in range(K)]
    counters = np.zeros((K, M), dtype=np.int64)
    t0 = ledger.t if ledger is not None else 0
    for t in range(params.tau):
        if ledger is not None and ledger.exhausted:
            break
        profile = np.array([choose_action(s, params, rng_players) for s in states])
        attack = next_attack(adversary, t0 + t, tag, M, rng_adv)
        out = sample_step(config, profile, attack, rng_reward)
        updated = []
        for k, s in enumerate(states):
            if s.content:
                counters[k, profile[k]] += 1
            u = utility(out.rewards[k], estimates, k, profile[k])
            updated.append(update_state(s, int(profile[k]), u, params, rng_players))
            if trace is not None:
                trace.append((epoch, t, k, int(profile[k]), u, s.content, s.baseline_action))
        snapshot = updated if params.sync_snapshot == "post_update" else states
        for k, s in enumerate(snapshot):
            bus.broadcast_bit(k, int(s.content), Phase.MATCHING)
        bits = bus.collect_round()
        states = [synchronize_mood(s, bits, params, rng_players) for s in updated]
        if ledger is not None:
            ledger.record_step(tag, step_regret(config.means, opt, profile, attack), out.attacked_any)
        if on_round is not None:
            on_round(t, states)
    return counters, states


def exploit_action(counters_by_epoch: dict, k: int, epoch: int, estimates) -> int:
    """Most frequent content arm over epochs ceil(epoch/2)..epoch; ties go to the smaller arm."""
    lo = -(-epoch // 2)
    totals = sum(np.asarray(counters_by_epoch[i][k]) for i in range(lo, epoch + 1))
    if np.any(totals > 0):
        return int(np.argmax(totals))
    return int(np.argmax(np.asarray(estimates[k])))
