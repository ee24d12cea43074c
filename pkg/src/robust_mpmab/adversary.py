"""Oblivious attack models producing one binary attack vector per step."""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import AttackProbabilityOne, ParseError, ValidationError


class Phase(enum.Enum):
    EXPLORATION = "exploration"
    MATCHING = "matching"
    EXPLOITATION = "exploitation"


ALL_PHASES = frozenset(Phase)


@dataclass(frozen=True)
class PhaseTag:
    phase: Phase
    epoch: int

    def __post_init__(self):
        if self.epoch < 1:
            raise ValueError("epoch index starts at 1")


@dataclass(frozen=True)
class NoAdversary:
    pass


@dataclass(frozen=True)
class IidSingleArm:
    """With probability ``p`` one uniformly chosen arm is attacked."""

    p: float
    active_phases: frozenset = frozenset({Phase.EXPLORATION, Phase.MATCHING})


@dataclass(frozen=True)
class IidPerArm:
    """Arm ``m`` is attacked independently with probability ``p[m]``."""

    p: tuple
    active_phases: frozenset = ALL_PHASES


@dataclass(frozen=True)
class Schedule:
    """Explicit attack vectors keyed by 0-based global step.

    The schedule repeats with period ``period`` (default: last listed step + 1);
    steps without an entry are attack-free.
    """

    entries: dict = field(default_factory=dict)
    period: int | None = None

    def length(self) -> int:
        if self.period is not None:
            return self.period
        return max(self.entries) + 1 if self.entries else 1


AdversarySpec = Union[NoAdversary, IidSingleArm, IidPerArm, Schedule]


def validate_spec(spec: AdversarySpec, M: int) -> AdversarySpec:
    if isinstance(spec, NoAdversary):
        return spec
    if isinstance(spec, IidSingleArm):
        if not 0 <= spec.p <= 1:
            raise ValidationError(f"p must be in [0, 1], got {spec.p}", "adversary.p")
        # each arm is hit with probability p/M; only M = 1, p = 1 reaches 1
        if spec.p / M >= 1:
            raise AttackProbabilityOne("the single arm is attacked at every step", "adversary.p")
        return spec
    if isinstance(spec, IidPerArm):
        p = np.asarray(spec.p, dtype=float)
        if p.shape != (M,):
            raise ValidationError(f"need {M} per-arm probabilities", "adversary.p")
        if p.min() < 0:
            raise ValidationError("probabilities must be >= 0", "adversary.p")
        if p.max() >= 1:
            arm = int(np.argmax(p)) + 1
            raise AttackProbabilityOne(f"arm {arm} is attacked with probability 1", "adversary.p")
        return spec
    if isinstance(spec, Schedule):
        period = spec.length()
        if period < 1 or any(t < 0 or t >= period for t in spec.entries):
            raise ValidationError("schedule steps must lie in [0, period)", "adversary.period")
        always = np.ones(M, dtype=bool)
        for t in range(period):
            w = spec.entries.get(t)
            if w is None:
                always[:] = False
                break
            w = np.asarray(w)
            if w.shape != (M,) or not np.isin(w, (0, 1)).all():
                raise ValidationError(f"step {t}: need a binary vector of length {M}", "adversary.entries")
            always &= w.astype(bool)
        if always.any():
            arm = int(np.flatnonzero(always)[0]) + 1
            raise AttackProbabilityOne(f"arm {arm} is attacked at every step of the schedule", "adversary.entries")
        return spec
    raise ValidationError(f"unknown adversary {spec!r}", "adversary")


def next_attack(spec: AdversarySpec, t: int, tag: PhaseTag, M: int, rng: np.random.Generator) -> np.ndarray:
    w = np.zeros(M, dtype=np.int8)
    if isinstance(spec, NoAdversary):
        return w
    if isinstance(spec, Schedule):
        v = spec.entries.get(t % spec.length())
        if v is not None:
            w[:] = v
        return w
    if tag.phase not in spec.active_phases:
        return w
    if isinstance(spec, IidSingleArm):
        if rng.random() < spec.p:
            w[rng.integers(M)] = 1
        return w
    w[:] = rng.random(M) < np.asarray(spec.p)
    return w


def attack_block(spec: AdversarySpec, t0: int, n: int, tag: PhaseTag, M: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` consecutive attack vectors starting at step ``t0``, as an (n, M) array."""
    w = np.zeros((n, M), dtype=np.int8)
    if isinstance(spec, NoAdversary) or n == 0:
        return w
    if isinstance(spec, Schedule):
        period = spec.length()
        for t, v in spec.entries.items():
            first = (t - t0) % period
            w[first::period] = v
        return w
    if tag.phase not in spec.active_phases:
        return w
    if isinstance(spec, IidSingleArm):
        hit = np.flatnonzero(rng.random(n) < spec.p)
        w[hit, rng.integers(M, size=hit.size)] = 1
        return w
    w[:] = rng.random((n, M)) < np.asarray(spec.p)
    return w


def attack_marginal(spec: AdversarySpec, M: int) -> list[tuple[tuple[int, ...], float]]:
    """Per-step distribution of the attack vector for i.i.d. models in an active phase."""
    zero = (0,) * M
    if isinstance(spec, NoAdversary):
        return [(zero, 1.0)]
    if isinstance(spec, IidSingleArm):
        out = [(zero, 1.0 - spec.p)]
        for m in range(M):
            out.append((tuple(int(i == m) for i in range(M)), spec.p / M))
        return [(w, q) for w, q in out if q > 0]
    if isinstance(spec, IidPerArm):
        p = np.asarray(spec.p, dtype=float)
        out = []
        for bits in range(2**M):
            w = tuple((bits >> m) & 1 for m in range(M))
            q = float(np.prod(np.where(w, p, 1.0 - p)))
            if q > 0:
                out.append((w, q))
        return out
    raise ValidationError("exact marginals exist only for i.i.d. adversaries", "adversary")


def load_schedule_csv(path, M: int, period: int | None = None) -> Schedule:
    """Read ``t,w_1,...,w_M`` rows; ``t`` is the 1-based global step."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["t"] + [f"w_{m}" for m in range(1, M + 1)]
        if header is None or [h.strip() for h in header] != expected:
            raise ParseError(f"schedule header must be {','.join(expected)}", "adversary.path")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                t = int(row[0])
                w = tuple(int(x) for x in row[1:])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}", "adversary.path") from None
            if len(w) != M or t < 1:
                raise ParseError(f"line {lineno}: malformed row", "adversary.path")
            entries[t - 1] = w
    return Schedule(entries=entries, period=period)
