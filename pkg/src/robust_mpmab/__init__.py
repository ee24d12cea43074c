"""Heterogeneous multi-player bandits under adversarial attacks.

Simulation of the exploration / matching / exploitation epoch policy and an
exact Markov-chain oracle for the matching dynamics on tiny instances.
"""
from .adversary import IidPerArm, IidSingleArm, NoAdversary, Phase, PhaseTag, Schedule
from .errors import (AttackProbabilityOne, NonUniqueOptimalMatching, ParameterViolation, ParseError,
                     ValidationError)
from .harness import ExperimentSpec, parse_spec, run_replications, run_single
from .metrics import OptimalMatching, optimal_matching
from .model import BetaRewards, DeterministicRewards, SystemConfig, validate_config

__all__ = [
    "AttackProbabilityOne", "BetaRewards", "DeterministicRewards", "ExperimentSpec", "IidPerArm",
    "IidSingleArm", "NoAdversary", "NonUniqueOptimalMatching", "OptimalMatching", "ParameterViolation",
    "ParseError", "Phase", "PhaseTag", "Schedule", "SystemConfig", "ValidationError", "optimal_matching",
    "parse_spec", "run_replications", "run_single", "validate_config",
]
