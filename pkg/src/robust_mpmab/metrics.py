"""Optimal matching, expected regret and per-run bookkeeping."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .adversary import Phase, PhaseTag
from .errors import NonUniqueOptimalMatching, ParameterViolation

TIE_TOL = 1e-12
MAX_ENUM_ARMS = 12


@dataclass(frozen=True)
class OptimalMatching:
    a_star: tuple
    J1: float
    J2: float
    Delta: float


def optimal_matching(means) -> OptimalMatching:
    """Best injective player-to-arm assignment by exhaustive enumeration.

    ``J2`` is the best total strictly below ``J1``. With ``K == 1 == M`` there is
    no second matching and ``J2`` is reported as 0.
    """
    means = np.asarray(means, dtype=float)
    K, M = means.shape
    if K > M:
        raise ParameterViolation(f"need K <= M, got K={K}, M={M}", "M")
    if M > MAX_ENUM_ARMS:
        raise ParameterViolation(f"enumeration limited to M <= {MAX_ENUM_ARMS}", "M")
    rows = np.arange(K)
    best, best_val, second_val = None, -np.inf, -np.inf
    ties = 0
    for perm in itertools.permutations(range(M), K):
        v = float(means[rows, perm].sum())
        if v > best_val + TIE_TOL:
            second_val = max(second_val, best_val)
            best, best_val, ties = perm, v, 0
        elif v >= best_val - TIE_TOL:
            ties += 1
        else:
            second_val = max(second_val, v)
    if ties:
        raise NonUniqueOptimalMatching(f"{ties + 1} matchings attain the optimum {best_val:.6g}", "means")
    if second_val == -np.inf:
        second_val = 0.0
    return OptimalMatching(tuple(best), best_val, second_val, (best_val - second_val) / (2 * M))


def step_regret(means, opt: OptimalMatching, profile, attack) -> float:
    means = np.asarray(means)
    profile = np.asarray(profile, dtype=int)
    K, M = means.shape
    n = np.bincount(profile, minlength=M)
    ok = (n[profile] == 1) & (np.asarray(attack)[profile] == 0)
    got = means[np.arange(K), profile][ok].sum()
    return max(0.0, opt.J1 - float(got))


@dataclass
class EpochRecord:
    epoch: int
    exploration_steps: int = 0
    matching_steps: int = 0
    exploitation_steps: int = 0
    exploration_success: bool | None = None
    matching_success: bool | None = None
    max_estimate_error: float | None = None
    estimates: list | None = None
    exploit_profile: list | None = None
    t_start: int = 0
    regret_start: float = 0.0
    t_exploit_start: int | None = None
    regret_exploit_start: float | None = None
    t_end: int | None = None
    regret_end: float | None = None


@dataclass
class RegretLedger:
    """Running mean-based regret with a strided series and per-phase attack counts.

    ``series[i]`` is the cumulative regret after ``(i + 1) * stride`` steps.
    """

    stride: int = 100
    horizon: int | None = None
    t: int = 0
    cumulative_regret: float = 0.0
    regret_by_phase: dict = field(default_factory=lambda: {p: 0.0 for p in Phase})
    W: dict = field(default_factory=lambda: {p: 0 for p in Phase})
    steps_by_phase: dict = field(default_factory=lambda: {p: 0 for p in Phase})
    series: list = field(default_factory=list)
    epochs: list = field(default_factory=list)

    @property
    def exhausted(self) -> bool:
        return self.horizon is not None and self.t >= self.horizon

    def room(self, n: int) -> int:
        if self.horizon is None:
            return n
        return max(0, min(n, self.horizon - self.t))

    def record_step(self, tag: PhaseTag, regret: float, attacked_any: bool) -> None:
        self.t += 1
        self.cumulative_regret += regret
        self.regret_by_phase[tag.phase] += regret
        self.W[tag.phase] += bool(attacked_any)
        self.steps_by_phase[tag.phase] += 1
        if self.t % self.stride == 0:
            self.series.append(self.cumulative_regret)

    def record_block(self, tag: PhaseTag, regrets: np.ndarray, attacked: np.ndarray) -> None:
        """Vectorised equivalent of calling :meth:`record_step` for each entry."""
        n = len(regrets)
        if n == 0:
            return
        cum = self.cumulative_regret + np.cumsum(regrets)
        first = self.stride - self.t % self.stride  # 1-based offset of the next sample
        if first <= n:
            self.series.extend(cum[first - 1 :: self.stride].tolist())
        self.t += n
        self.cumulative_regret = float(cum[-1])
        self.regret_by_phase[tag.phase] += float(np.sum(regrets))
        self.W[tag.phase] += int(np.count_nonzero(attacked))
        self.steps_by_phase[tag.phase] += n

    def epoch_flags(self, epoch: int, estimates, means, Delta: float, exploit_profile, a_star) -> EpochRecord:
        err = float(np.max(np.abs(np.asarray(estimates) - np.asarray(means))))
        rec = self.epoch_record(epoch)
        rec.max_estimate_error = err
        rec.exploration_success = err < Delta
        rec.matching_success = tuple(int(a) for a in exploit_profile) == tuple(a_star)
        return rec

    def epoch_record(self, epoch: int) -> EpochRecord:
        for rec in self.epochs:
            if rec.epoch == epoch:
                return rec
        rec = EpochRecord(epoch)
        self.epochs.append(rec)
        return rec


def estimate_tail_bound(T0: int, Delta: float, delta_exp: float, epoch: int, pairs: int = 1) -> float:
    """Upper bound on P(some estimate off by >= Delta in epochs ceil(l/2)..l).

    ``pairs`` multiplies the single (player, arm) bound by a union bound; use
    ``K * M`` for the event that any estimate is off.
    """
    g = T0 * Delta**2 * (epoch / 4) ** delta_exp
    return pairs * np.exp(-0.5 * g * epoch) / (1.0 - np.exp(-g))
