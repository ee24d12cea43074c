"""Reliable synchronous one-bit broadcast rounds with per-phase bit accounting."""
from __future__ import annotations

import numpy as np

from .adversary import Phase
from .errors import DuplicateSend, IncompleteRound


class BitBus:
    def __init__(self, K: int):
        self.K = K
        self._round: dict[int, int] = {}
        self.sent = {phase: np.zeros(K, dtype=np.int64) for phase in Phase}

    def broadcast_bit(self, sender: int, bit: int, phase: Phase) -> None:
        if sender in self._round:
            raise DuplicateSend(f"player {sender} already sent a bit this round")
        if bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {bit!r}")
        self._round[sender] = int(bit)
        self.sent[phase][sender] += 1

    def pending(self) -> int:
        return len(self._round)

    def collect_round(self) -> np.ndarray:
        if len(self._round) != self.K:
            raise IncompleteRound(f"{len(self._round)} of {self.K} bits present")
        bits = np.array([self._round[k] for k in range(self.K)], dtype=np.int8)
        self._round.clear()
        return bits

    def budget_report(self) -> dict:
        """Bits sent per player, split by phase, plus per-player totals."""
        by_phase = {phase.value: self.sent[phase].tolist() for phase in Phase}
        total = sum(self.sent[phase] for phase in Phase)
        return {"per_phase": by_phase, "per_player": total.tolist()}


def expected_bits(M: int, taus) -> int:
    """Per-player bit count of a completed run: one done bit per arm and one mood bit per round."""
    return sum(M + tau for tau in taus)
