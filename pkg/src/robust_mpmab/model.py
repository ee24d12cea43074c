"""Bandit instance, collision/attack reward semantics and reward sampling.

Arms and players are 0-based in the Python API. File formats and the CLI
use 1-based labels; conversion happens at the I/O boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import logging

import numpy as np

from .errors import ParameterViolation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BetaRewards:
    """Rewards drawn from Beta(nu * mu, nu * (1 - mu))."""

    nu: float = 2.0


@dataclass(frozen=True)
class DeterministicRewards:
    """Reward equals the mean exactly."""


RewardModel = Union[BetaRewards, DeterministicRewards]


@dataclass(frozen=True)
class SystemConfig:
    K: int
    M: int
    means: np.ndarray
    reward_model: RewardModel = field(default_factory=BetaRewards)
    delta_exp: float = 0.0
    epsilon: float = 1e-4
    kappa: float = 3.0
    beta: float = 2.0
    T0: int = 2000
    c2: int = 2000
    c3: int = 10000
    epochs: int = 10
    base_seed: int = 0

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    def required(self, epoch: int) -> int:
        """Attack-free samples per arm in the exploration phase of ``epoch``."""
        return max(1, int(np.ceil(self.T0 * epoch**self.delta_exp - 1e-9)))

    def tau(self, epoch: int) -> int:
        return max(1, int(np.ceil(self.c2 * epoch**self.delta_exp - 1e-9)))

    def exploit_length(self, epoch: int) -> int:
        return self.c3 * 2**epoch


@dataclass(frozen=True)
class StepOutcome:
    rewards: np.ndarray
    collisions: np.ndarray
    attacked_any: bool


def validate_config(config: SystemConfig) -> SystemConfig:
    K, M = config.K, config.M
    if not (isinstance(K, (int, np.integer)) and K >= 1):
        raise ParameterViolation(f"K must be an integer >= 1, got {K!r}", "K")
    if not (isinstance(M, (int, np.integer)) and M >= K):
        raise ParameterViolation(f"need K <= M, got K={K}, M={M}", "M")
    if config.means.shape != (K, M):
        raise ParameterViolation(f"means must be {K}x{M}, got {config.means.shape}", "means")
    if not np.all(np.isfinite(config.means)) or config.means.min() < 0 or config.means.max() > 1:
        raise ParameterViolation("means must lie in [0, 1]", "means")
    rm = config.reward_model
    if isinstance(rm, BetaRewards):
        if not rm.nu > 0:
            raise ParameterViolation("concentration nu must be positive", "reward_model.nu")
        # mu in {0, 1} gives a degenerate Beta; mu = 0 would also stall exploration
        if config.means.min() <= 0 or config.means.max() >= 1:
            raise ParameterViolation("beta rewards need every mean in (0, 1)", "means")
    elif isinstance(rm, DeterministicRewards):
        if config.means.min() <= 0:
            raise ParameterViolation("deterministic rewards need every mean in (0, 1]", "means")
    else:
        raise ParameterViolation(f"unknown reward model {rm!r}", "reward_model")
    if not 0 < config.epsilon < 1:
        raise ParameterViolation(f"epsilon must be in (0, 1), got {config.epsilon}", "epsilon")
    if config.kappa < M:
        raise ParameterViolation(f"kappa must exceed M={M}, got {config.kappa}", "kappa")
    if config.kappa == M:
        # the published experiment runs at kappa = M; accepted at the boundary
        log.warning("kappa == M (%s): exploration resistance is at its lower limit", M)
    if not config.beta < config.kappa:
        raise ParameterViolation("beta must be smaller than kappa", "beta")
    if config.delta_exp < 0:
        raise ParameterViolation("delta_exp must be >= 0", "delta_exp")
    for name in ("T0", "c2", "c3"):
        v = getattr(config, name)
        if not (isinstance(v, (int, np.integer)) and v >= 1):
            raise ParameterViolation(f"{name} must be a positive integer, got {v!r}", name)
    if not (isinstance(config.epochs, (int, np.integer)) and config.epochs >= 1):
        raise ParameterViolation("epochs must be an integer >= 1", "epochs")

    from .metrics import optimal_matching

    optimal_matching(config.means)  # raises NonUniqueOptimalMatching
    return config


def collision_counts(profile, M: int) -> np.ndarray:
    """Number of players on each arm."""
    return np.bincount(np.asarray(profile, dtype=int), minlength=M)


def mean_reward(config: SystemConfig, k: int, m: int, n: int, w_m: int) -> float:
    if n >= 2 or w_m:
        return 0.0
    return float(config.means[k, m])


def clean_mask(profile, attack, M: int) -> np.ndarray:
    """True for players that are alone on an unattacked arm."""
    profile = np.asarray(profile, dtype=int)
    n = collision_counts(profile, M)
    return (n[profile] == 1) & (np.asarray(attack)[profile] == 0)


def draw_rewards(config: SystemConfig, mu: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    rm = config.reward_model
    if isinstance(rm, DeterministicRewards):
        return mu.astype(float, copy=True)
    return rng.beta(rm.nu * mu, rm.nu * (1.0 - mu))


def sample_step(config: SystemConfig, profile, attack, rng: np.random.Generator) -> StepOutcome:
    profile = np.asarray(profile, dtype=int)
    attack = np.asarray(attack, dtype=np.int8)
    n = collision_counts(profile, config.M)
    ok = (n[profile] == 1) & (attack[profile] == 0)
    rewards = np.zeros(config.K)
    if ok.any():
        players = np.flatnonzero(ok)
        rewards[players] = draw_rewards(config, config.means[players, profile[players]], rng)
    return StepOutcome(rewards=rewards, collisions=n, attacked_any=bool(attack.any()))
