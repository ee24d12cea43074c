import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURE, paper_config
from robust_mpmab.adversary import IidSingleArm, NoAdversary
from robust_mpmab.comms import BitBus
from robust_mpmab.matching import (
    U_MAX,
    MatchParams,
    PlayerMatchState,
    choose_action,
    exploit_action,
    run_matching_phase,
    synchronize_mood,
    update_state,
    utility,
)
from robust_mpmab.model import DeterministicRewards

N = 100_000


def _within(count, p, n=N, z=4.0):
    se = np.sqrt(p * (1 - p) / n)
    return abs(count / n - p) <= z * se + 1e-12


def test_content_action_frequencies():
    params = MatchParams(0.1, 3.0, 2.0, tau=1, M=3)
    s = PlayerMatchState(1, 0.8, True)
    rng = np.random.default_rng(0)
    acts = np.array([choose_action(s, params, rng) for _ in range(N)])
    counts = np.bincount(acts, minlength=3)
    assert _within(counts[1], 0.999)
    assert _within(counts[0], 0.0005) and _within(counts[2], 0.0005)


def test_discontent_is_uniform():
    params = MatchParams(0.1, 3.0, 2.0, tau=1, M=3)
    s = PlayerMatchState(1, 0.8, False)
    rng = np.random.default_rng(1)
    counts = np.bincount([choose_action(s, params, rng) for _ in range(30_000)], minlength=3)
    for c in counts:
        assert _within(c, 1 / 3, n=30_000)


def test_utility_clamp_and_zero():
    est = np.array([[1.0, 0.4]])
    assert utility(0.7, est, 0, 0) == U_MAX
    assert utility(0.7, est, 0, 1) == 0.4
    assert utility(0.0, est, 0, 1) == 0.0


def test_content_baseline_is_sticky():
    params = MatchParams(0.1, 3.0, 2.0, tau=1, M=2)
    s = PlayerMatchState(0, 0.9, True)
    rng = np.random.default_rng(2)
    # even a zero (attacked) reward leaves the state alone
    for u in (0.0, 0.9):
        assert update_state(s, 0, u, params, rng) == s


def test_update_content_probability():
    eps = 0.01
    params = MatchParams(eps, 3.0, 2.0, tau=1, M=2)
    s = PlayerMatchState(0, 0.0, False)
    rng = np.random.default_rng(3)
    outs = [update_state(s, 1, 0.8, params, rng) for _ in range(N)]
    assert all(o.baseline_action == 1 and o.baseline_utility == 0.8 for o in outs)
    p = eps**0.2
    assert p == pytest.approx(0.3981, abs=1e-4)
    assert _within(sum(o.content for o in outs), p)


def test_update_zero_utility_stays_discontent_mostly():
    params = MatchParams(0.05, 3.0, 2.0, tau=1, M=2)
    rng = np.random.default_rng(4)
    n = 20_000
    c = sum(update_state(PlayerMatchState(0, 0.3, True), 1, 0.0, params, rng).content for _ in range(n))
    assert _within(c, 0.05, n=n)


def test_sync_survival():
    eps = 0.01
    params = MatchParams(eps, 3.0, 2.0, tau=1, M=2)
    rng = np.random.default_rng(5)
    s = PlayerMatchState(0, 0.9, True)
    survived = sum(synchronize_mood(s, [1, 0], params, rng).content for _ in range(N))
    assert _within(survived, eps**2)
    assert synchronize_mood(s, [1, 1], params, rng) == s
    d = PlayerMatchState(0, 0.9, False)
    assert synchronize_mood(d, [0, 0], params, rng) == d


def test_sync_keeps_baseline():
    params = MatchParams(0.5, 3.0, 2.0, tau=1, M=2)
    out = synchronize_mood(PlayerMatchState(1, 0.7, True), [0, 1], params, np.random.default_rng(7))
    assert (out.baseline_action, out.baseline_utility) == (1, 0.7)


@settings(max_examples=30)
@given(seed=st.integers(0, 2**31))
def test_tiny_epsilon_absorbs_and_collapses(seed):
    # near eps = 0: content states hold, zero-utility plays never turn content
    rng = np.random.default_rng(seed)
    params = MatchParams(1e-12, 3.0, 2.0, tau=1, M=2)
    s = PlayerMatchState(1, 0.8, True)
    assert choose_action(s, params, rng) == 1
    assert not update_state(PlayerMatchState(0, 0.0, False), 1, 0.0, params, rng).content
    assert not synchronize_mood(s, [0, 1], params, rng).content


def _det_config(**kw):
    kw.setdefault("reward_model", DeterministicRewards())
    return paper_config(**kw)


def test_tau_zero_gives_zero_counters():
    cfg = _det_config()
    params = MatchParams(0.1, 3.0, 2.0, tau=0, M=3)
    rng = np.random.default_rng(0)
    counters, states = run_matching_phase(cfg, cfg.means, params, NoAdversary(), BitBus(3), rng, rng, rng)
    assert counters.sum() == 0 and len(states) == 3


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), tau=st.integers(1, 300), eps=st.sampled_from([0.05, 0.2, 0.5]))
def test_counters_bounded_and_bits_exact(seed, tau, eps):
    cfg = _det_config(epsilon=eps)
    params = MatchParams(eps, 3.0, 2.0, tau=tau, M=3)
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
    bus = BitBus(3)
    counters, _ = run_matching_phase(cfg, cfg.means, params, IidSingleArm(0.4), bus, *rngs)
    assert np.all(counters.sum(axis=1) <= tau)
    assert bus.budget_report()["per_phase"]["matching"] == [tau] * 3


def test_fixture_convergence():
    from robust_mpmab.model import SystemConfig

    cfg = SystemConfig(K=2, M=2, means=FIXTURE, reward_model=DeterministicRewards(), epsilon=0.01)
    params = MatchParams(0.01, 3.0, 2.0, tau=5000, M=2)
    target = ((0, 0.9, True), (1, 0.8, True))
    hits = []
    for seed in range(3):
        rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]
        n = [0]

        def tally(t, states):
            n[0] += tuple(s.key() for s in states) == target

        run_matching_phase(cfg, FIXTURE, params, NoAdversary(), BitBus(2), *rngs, on_round=tally)
        hits.append(n[0] / 5000)
    assert np.mean(hits) >= 0.8


def test_pre_update_snapshot_runs():
    cfg = _det_config(epsilon=0.2)
    params = MatchParams(0.2, 3.0, 2.0, tau=50, M=3, sync_snapshot="pre_update")
    rng = np.random.default_rng(0)
    counters, _ = run_matching_phase(cfg, cfg.means, params, NoAdversary(), BitBus(3), rng, rng, rng)
    assert counters.sum() <= 150
    with pytest.raises(ValueError):
        MatchParams(0.2, 3.0, 2.0, tau=1, M=3, sync_snapshot="bogus")


def test_trace_rows():
    cfg = _det_config(epsilon=0.2)
    params = MatchParams(0.2, 3.0, 2.0, tau=4, M=3)
    trace = []
    rng = np.random.default_rng(0)
    run_matching_phase(cfg, cfg.means, params, NoAdversary(), BitBus(3), rng, rng, rng, epoch=2, trace=trace)
    assert len(trace) == 12 and all(r[0] == 2 for r in trace)


def test_exploit_action_window():
    c = {
        1: np.array([[0, 90, 0]]),
        2: np.array([[5, 0, 0]]),
        3: np.array([[0, 0, 3]]),
    }
    est = np.array([[0.1, 0.2, 0.9]])
    # epoch 3 uses epochs 2..3: arm 0 (5) beats arm 2 (3), epoch 1 ignored
    assert exploit_action(c, 0, 3, est) == 0
    # epoch 1 alone
    assert exploit_action(c, 0, 1, est) == 1


def test_exploit_action_tie_and_fallback():
    est = np.array([[0.1, 0.2, 0.9]])
    assert exploit_action({1: np.array([[4, 4, 0]])}, 0, 1, est) == 0
    assert exploit_action({1: np.zeros((1, 3), dtype=int)}, 0, 1, est) == 2
