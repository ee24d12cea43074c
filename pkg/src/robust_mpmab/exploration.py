"""Round-robin exploration by player ID with attack-filtered sample counting.

Every player walks the arms in the order ``k, k+1, ..., k+M-1`` (mod M), one
slot at a time. Zero rewards can only come from attacks here, because the
offsets keep players on distinct arms, so they are discarded. A player that
has enough clean samples for its slot sends a single done bit and keeps
pulling the same arm until every player has sent one, after which all slots
advance together.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adversary import Phase, PhaseTag, next_attack
from .comms import BitBus
from .errors import ExplorationStalled
from .metrics import OptimalMatching, RegretLedger, step_regret
from .model import SystemConfig, sample_step

MAX_SLOT_STEPS = 10**9


def exploration_arm(k: int, slot: int, M: int) -> int:
    """Arm pulled by player ``k`` in ``slot`` (all 0-based)."""
    return (k + slot) % M


@dataclass
class ExplorationState:
    K: int
    M: int
    counts: np.ndarray = None  # clean samples per (player, arm), across epochs
    sums: np.ndarray = None
    slot_counts: np.ndarray = None  # clean samples in the current slot
    slot: int = 0
    done_sent: np.ndarray = None
    done_seen: np.ndarray = None
    complete: bool = False
    count_while_waiting: bool = True

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((self.K, self.M), dtype=np.int64)
        if self.sums is None:
            self.sums = np.zeros((self.K, self.M))
        self.slot_counts = np.zeros(self.K, dtype=np.int64)
        self.done_sent = np.zeros(self.K, dtype=bool)
        self.done_seen = np.zeros(self.K, dtype=bool)

    def start_phase(self) -> None:
        """Reset the per-phase cursor; accumulated counts and sums are kept."""
        self.slot = 0
        self.complete = False
        self.slot_counts[:] = 0
        self.done_sent[:] = False
        self.done_seen[:] = False

    def arm(self, k: int) -> int:
        return exploration_arm(k, self.slot, self.M)


def exploration_step(state: ExplorationState, k: int, reward: float, required: int) -> bool:
    """Record one observation of player ``k``; return True when its done bit should go out."""
    if reward <= 0:
        return False
    if state.done_sent[k] and not state.count_while_waiting:
        return False
    m = state.arm(k)
    state.counts[k, m] += 1
    state.sums[k, m] += reward
    state.slot_counts[k] += 1
    if not state.done_sent[k] and state.slot_counts[k] >= required:
        state.done_sent[k] = True
        return True
    return False


def advance_slot(state: ExplorationState) -> bool:
    """Move every player to its next arm once all done bits are in. Returns True if advanced."""
    if not state.done_seen.all():
        return False
    state.slot += 1
    state.slot_counts[:] = 0
    state.done_sent[:] = False
    state.done_seen[:] = False
    if state.slot >= state.M:
        state.complete = True
    return True


def finalize_estimates(state: ExplorationState) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        est = np.where(state.counts > 0, state.sums / np.maximum(state.counts, 1), 0.0)
    return np.clip(est, 0.0, 1.0)


def run_exploration_phase(
    config: SystemConfig,
    epoch: int,
    state: ExplorationState,
    adversary,
    bus: BitBus,
    rng_reward: np.random.Generator,
    rng_adv: np.random.Generator,
    ledger: RegretLedger | None = None,
    opt: OptimalMatching | None = None,
) -> int:
    """Run one exploration phase in lockstep; returns the number of steps taken.

    Stops early (leaving ``state.complete`` False) if the ledger horizon is hit.
    """
    K, M = config.K, config.M
    required = config.required(epoch)
    tag = PhaseTag(Phase.EXPLORATION, epoch)
    state.start_phase()
    steps = 0
    slot_steps = 0
    t0 = ledger.t if ledger is not None else 0
    while not state.complete:
        if ledger is not None and ledger.exhausted:
            break
        profile = np.array([state.arm(k) for k in range(K)])
        attack = next_attack(adversary, t0 + steps, tag, M, rng_adv)
        out = sample_step(config, profile, attack, rng_reward)
        for k in range(K):
            if exploration_step(state, k, out.rewards[k], required):
                bus.broadcast_bit(k, 1, Phase.EXPLORATION)
        if ledger is not None:
            ledger.record_step(tag, step_regret(config.means, opt, profile, attack), out.attacked_any)
        steps += 1
        slot_steps += 1
        if bus.pending() == K:
            state.done_seen[:] = bus.collect_round().astype(bool)
            advance_slot(state)
            slot_steps = 0
        elif slot_steps > MAX_SLOT_STEPS:
            raise ExplorationStalled(f"slot {state.slot} of epoch {epoch} exceeded {MAX_SLOT_STEPS} steps")
    return steps
