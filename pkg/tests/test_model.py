import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import PAPER_MEANS, paper_config
from robust_mpmab.errors import NonUniqueOptimalMatching, ParameterViolation
from robust_mpmab.model import (BetaRewards, DeterministicRewards, collision_counts, mean_reward,
                                sample_step, validate_config)


def test_paper_config_accepted(paper_cfg):
    assert validate_config(paper_cfg) is paper_cfg


@pytest.mark.parametrize("changes, field", [
    (dict(K=4, means=np.full((4, 3), 0.5)), "M"),
    (dict(kappa=2.5), "kappa"),
    (dict(beta=3.0), "beta"),
    (dict(epsilon=1.5), "epsilon"),
    (dict(epsilon=0.0), "epsilon"),
    (dict(T0=0), "T0"),
])
def test_parameter_violations(changes, field):
    with pytest.raises(ParameterViolation) as info:
        validate_config(paper_config(**changes))
    assert info.value.field == field


def test_all_equal_means_not_unique():
    # every one of the 6 matchings totals 1.5
    with pytest.raises(NonUniqueOptimalMatching):
        validate_config(paper_config(means=np.full((3, 3), 0.5)))


def test_beta_needs_interior_means():
    with pytest.raises(ParameterViolation):
        validate_config(paper_config(means=np.where(PAPER_MEANS == 0.8, 1.0, PAPER_MEANS)))
    cfg = paper_config(means=np.where(PAPER_MEANS == 0.8, 1.0, PAPER_MEANS), reward_model=DeterministicRewards())
    validate_config(cfg)


@pytest.mark.parametrize("profile, expected", [
    ([0, 1, 2], [1, 1, 1]),
    ([1, 1, 1], [0, 3, 0]),
    ([0, 0, 2], [2, 0, 1]),
])
def test_collision_counts(profile, expected):
    assert collision_counts(profile, 3).tolist() == expected


@given(st.lists(st.integers(0, 4), min_size=1, max_size=5))
def test_collision_counts_sum_to_K(profile):
    assert collision_counts(profile, 5).sum() == len(profile)


def test_mean_reward(paper_cfg):
    assert mean_reward(paper_cfg, 0, 0, 1, 0) == 0.8
    assert mean_reward(paper_cfg, 0, 0, 2, 0) == 0
    assert mean_reward(paper_cfg, 0, 0, 1, 1) == 0


def test_sample_step_collision_zeroes(paper_cfg, rng):
    out = sample_step(paper_cfg, [0, 0, 2], [0, 1, 0], rng)
    assert out.rewards[0] == 0 and out.rewards[1] == 0
    assert out.rewards[2] > 0
    assert out.collisions.tolist() == [2, 0, 1]
    assert out.attacked_any


def test_sample_step_attack_zeroes_only_target(paper_cfg, rng):
    for _ in range(200):
        out = sample_step(paper_cfg, [0, 1, 2], [0, 1, 0], rng)
        assert out.rewards[1] == 0
        assert out.rewards[0] > 0 and out.rewards[2] > 0


def test_deterministic_rewards_exact(det_cfg, rng):
    out = sample_step(det_cfg, [0, 1, 2], [0, 0, 0], rng)
    assert out.rewards.tolist() == [0.8, 0.7, 0.5]
    assert not out.attacked_any


@given(profile=st.lists(st.integers(0, 2), min_size=3, max_size=3),
       attack=st.lists(st.integers(0, 1), min_size=3, max_size=3),
       seed=st.integers(0, 2**32 - 1))
def test_zeroing_rule(profile, attack, seed):
    cfg = paper_config()
    out = sample_step(cfg, profile, attack, np.random.default_rng(seed))
    n = collision_counts(profile, 3)
    for k, a in enumerate(profile):
        blocked = n[a] >= 2 or attack[a] == 1
        assert (out.rewards[k] == 0) == blocked
        assert 0 <= out.rewards[k] <= 1


@given(seed=st.integers(0, 2**32 - 1))
def test_sample_step_deterministic_given_seed(seed):
    cfg = paper_config()
    a = sample_step(cfg, [2, 0, 1], [0, 0, 1], np.random.default_rng(seed))
    b = sample_step(cfg, [2, 0, 1], [0, 0, 1], np.random.default_rng(seed))
    assert np.array_equal(a.rewards, b.rewards)


@pytest.mark.parametrize("k, m", [(0, 0), (1, 2), (2, 1)])
def test_beta_empirical_mean(k, m):
    cfg = paper_config(reward_model=BetaRewards(2.0))
    rng = np.random.default_rng(7 + k + m)
    profile = [(m + j - k) % 3 for j in range(3)]  # player k on arm m, others elsewhere
    draws = np.array([sample_step(cfg, profile, [0, 0, 0], rng).rewards[k] for _ in range(100_000)])
    mu = PAPER_MEANS[k, m]
    se = np.sqrt(mu * (1 - mu) / 3 / draws.size)  # Beta(2mu, 2(1-mu)) variance mu(1-mu)/3
    assert abs(draws.mean() - mu) < 4 * se
