import numpy as np
import pytest
from hypothesis import given, strategies as st

from robust_mpmab.adversary import (IidPerArm, IidSingleArm, NoAdversary, Phase, PhaseTag, Schedule,
                                    attack_block, attack_marginal, load_schedule_csv, next_attack,
                                    validate_spec)
from robust_mpmab.errors import AttackProbabilityOne, ParseError

EXPLORE = PhaseTag(Phase.EXPLORATION, 1)
EXPLOIT = PhaseTag(Phase.EXPLOITATION, 1)


def test_no_adversary(rng):
    assert next_attack(NoAdversary(), 0, EXPLORE, 3, rng).tolist() == [0, 0, 0]


def test_inactive_phase_is_quiet(rng):
    spec = IidSingleArm(0.4)
    for t in range(100):
        assert not next_attack(spec, t, EXPLOIT, 3, rng).any()


def test_single_arm_frequencies():
    rng = np.random.default_rng(3)
    spec = IidSingleArm(0.9)
    W = np.array([next_attack(spec, t, EXPLORE, 3, rng) for t in range(100_000)])
    assert W.sum(axis=1).max() <= 1
    assert 0.894 <= W.any(axis=1).mean() <= 0.906
    per_arm = W.mean(axis=0)
    se = np.sqrt(0.3 * 0.7 / W.shape[0])
    assert np.all(np.abs(per_arm - 0.3) < 4 * se)


def test_block_matches_per_step_distribution():
    rng = np.random.default_rng(5)
    W = attack_block(IidSingleArm(0.9), 0, 100_000, EXPLORE, 3, rng)
    assert W.sum(axis=1).max() <= 1
    assert 0.894 <= W.any(axis=1).mean() <= 0.906
    assert not attack_block(IidSingleArm(0.9), 0, 50, EXPLOIT, 3, rng).any()


@given(seed=st.integers(0, 2**32 - 1), t=st.integers(0, 10**6))
def test_deterministic_given_seed(seed, t):
    spec = IidPerArm((0.3, 0.5, 0.1))
    a = next_attack(spec, t, EXPLORE, 3, np.random.default_rng(seed))
    b = next_attack(spec, t, EXPLORE, 3, np.random.default_rng(seed))
    assert np.array_equal(a, b)


def test_validate_per_arm():
    assert validate_spec(IidPerArm((0.5, 0.5, 0.5)), 3)
    with pytest.raises(AttackProbabilityOne):
        validate_spec(IidPerArm((1.0, 0.2, 0.2)), 3)


def test_validate_schedule():
    always = Schedule({t: (1, 0, 0) for t in range(10)})
    with pytest.raises(AttackProbabilityOne):
        validate_spec(always, 3)
    gap = Schedule({t: (1, 0, 0) for t in range(9)}, period=10)
    assert validate_spec(gap, 3)


def test_single_arm_p1_only_fails_with_one_arm():
    assert validate_spec(IidSingleArm(1.0), 3)
    with pytest.raises(AttackProbabilityOne):
        validate_spec(IidSingleArm(1.0), 1)


def test_schedule_cycles(rng):
    spec = Schedule({0: (0, 1, 0), 2: (1, 0, 0)})
    got = [next_attack(spec, t, EXPLORE, 3, rng).tolist() for t in range(6)]
    assert got == [[0, 1, 0], [0, 0, 0], [1, 0, 0]] * 2
    assert attack_block(spec, 1, 6, EXPLORE, 3, rng).tolist() == got[1:] + [[0, 1, 0]]


def test_schedule_csv(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,w_1,w_2,w_3\n1,0,1,0\n3,1,0,0\n")
    spec = load_schedule_csv(path, 3)
    assert spec.entries == {0: (0, 1, 0), 2: (1, 0, 0)}
    path.write_text("t,a,b\n1,0,1\n")
    with pytest.raises(ParseError):
        load_schedule_csv(path, 3)


@pytest.mark.parametrize("spec", [NoAdversary(), IidSingleArm(0.4), IidPerArm((0.1, 0.5, 0.3))])
def test_marginal_sums_to_one(spec):
    marginal = attack_marginal(spec, 3)
    assert sum(q for _, q in marginal) == pytest.approx(1.0, abs=1e-12)
    for w, _ in marginal:
        assert len(w) == 3 and set(w) <= {0, 1}
