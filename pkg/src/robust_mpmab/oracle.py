"""Exact joint-state Markov chain of the matching dynamics for tiny instances.

The chain is assembled directly from the branch probabilities of one round
(action choice, utility, state update, mood broadcast), independently of the
simulator in :mod:`robust_mpmab.matching`, so the two can check each other.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InstanceTooLarge, NoConvergence, NonUniqueOptimalMatching, ZeroTransition
from .metrics import TIE_TOL, OptimalMatching

U_CLAMP = 1.0 - 1e-6
MAX_K, MAX_M = 2, 3
EPS_GRID = (0.1, 0.05, 0.02, 0.01)


def _clamp(x: float) -> float:
    return min(max(float(x), 0.0), U_CLAMP)


@dataclass
class ChainModel:
    K: int
    M: int
    epsilon: float
    kappa: float
    beta: float
    utilities: list  # per player: sorted utility alphabet
    state_list: list  # joint states, each a tuple of per-player (arm, utility, content)
    P: np.ndarray
    marginal: list
    sync_snapshot: str = "post_update"
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {z: i for i, z in enumerate(self.state_list)}

    def moods(self) -> np.ndarray:
        return np.array([[s[2] for s in z] for z in self.state_list], dtype=bool)


@dataclass
class ClassificationReport:
    absorbing_states: list
    closed_classes: list
    transient_states: list
    all_content_absorbing: bool
    all_discontent_closed: bool
    mixed_transient: bool


def aligned_state(estimates, profile) -> tuple:
    """All-content joint state whose baselines are ``profile`` with matching utilities."""
    return tuple((int(a), _clamp(estimates[k][a]), True) for k, a in enumerate(profile))


def _product(dists):
    """Joint distribution of independent per-player outcome lists [(value, prob), ...]."""
    for combo in itertools.product(*dists):
        p = 1.0
        for _, q in combo:
            p *= q
        if p > 0:
            yield tuple(v for v, _ in combo), p


def build_chain(estimates, M: int, K: int, epsilon: float, kappa: float = 3.0, beta: float = 2.0,
                adversary_marginal=None, sync_snapshot: str = "post_update") -> ChainModel:
    if K > MAX_K or M > MAX_M or K > M:
        raise InstanceTooLarge(f"exact chain supports K <= {MAX_K}, M <= {MAX_M}, K <= M; got K={K}, M={M}")
    est = np.asarray(estimates, dtype=float)
    if adversary_marginal is None:
        adversary_marginal = [((0,) * M, 1.0)]
    eps = float(epsilon)
    explore = eps**kappa
    keep = eps**beta

    alphabets = [sorted({0.0} | {_clamp(est[k, m]) for m in range(M)}) for k in range(K)]
    per_player = [[(a, u, c) for a in range(M) for u in alphabets[k] for c in (True, False)] for k in range(K)]
    state_list = list(itertools.product(*per_player))
    index = {z: i for i, z in enumerate(state_list)}
    n = len(state_list)
    P = np.zeros((n, n))

    def action_dist(s):
        a_bar, _, content = s
        if not content:
            return [(a, 1.0 / M) for a in range(M)]
        if M == 1:
            return [(a_bar, 1.0)]
        return [(a, 1.0 - explore if a == a_bar else explore / (M - 1)) for a in range(M)]

    def update_dist(s, a, u):
        if s[2] and a == s[0]:
            return [(s, 1.0)]
        p_c = eps ** (1.0 - u)
        return [((a, u, True), p_c), ((a, u, False), 1.0 - p_c)]

    def sync_dist(s, all_content):
        if not s[2] or all_content:
            return [(s, 1.0)]
        return [(s, keep), ((s[0], s[1], False), 1.0 - keep)]

    for i, z in enumerate(state_list):
        row = P[i]
        for profile, p_a in _product([action_dist(s) for s in z]):
            occupancy = np.bincount(profile, minlength=M)
            for w, p_w in adversary_marginal:
                u = [_clamp(est[k, a]) if occupancy[a] == 1 and not w[a] else 0.0 for k, a in enumerate(profile)]
                for y, p_y in _product([update_dist(z[k], profile[k], u[k]) for k in range(K)]):
                    snap = y if sync_snapshot == "post_update" else z
                    all_content = all(s[2] for s in snap)
                    for z_next, p_s in _product([sync_dist(s, all_content) for s in y]):
                        row[index[z_next]] += p_a * p_w * p_y * p_s
    return ChainModel(K, M, eps, kappa, beta, alphabets, state_list, P, list(adversary_marginal), sync_snapshot)


def stationary_distribution(chain_or_P, tol: float = 1e-10, max_doublings: int = 64) -> np.ndarray:
    """Power iteration from the uniform vector, accelerated by repeated squaring.

    Iteration ``j`` applies ``P**(2**j)``, so after ``j`` iterations the vector
    equals ``uniform @ P**(2**(j + 1) - 1)``.
    """
    P = chain_or_P.P if isinstance(chain_or_P, ChainModel) else np.asarray(chain_or_P, dtype=float)
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    Q = P.copy()
    for _ in range(max_doublings):
        pi = pi @ Q
        pi /= pi.sum()
        if np.abs(pi @ P - pi).sum() <= tol:
            return pi
        Q = Q @ Q
        Q /= Q.sum(axis=1, keepdims=True)
    raise NoConvergence(f"residual above {tol} after {max_doublings} doublings")


def classify_p0(chain: ChainModel, atol: float = 1e-12) -> ClassificationReport:
    support = chain.P > atol
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    closed = []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        outside = np.ones(len(labels), dtype=bool)
        outside[members] = False
        if not support[np.ix_(members, outside)].any():
            closed.append(members)
    absorbing = [int(m[0]) for m in closed if len(m) == 1]
    classes = [m.tolist() for m in closed if len(m) > 1]
    recurrent = set(absorbing) | {i for c in classes for i in c}
    transient = [i for i in range(len(labels)) if i not in recurrent]

    moods = chain.moods()
    all_c = moods.all(axis=1)
    all_d = (~moods).all(axis=1)
    mixed = ~(all_c | all_d)

    content_absorbing = bool(np.all(np.abs(np.diag(chain.P)[all_c] - 1.0) <= atol))
    d_idx = np.flatnonzero(all_d)
    d_closed = not support[np.ix_(d_idx, ~all_d)].any()
    d_classes = [m for m in closed if all_d[m].all()]
    discontent_closed = bool(d_closed and len(d_classes) == 1)
    collapse = np.abs(chain.P[np.ix_(mixed, all_d)].sum(axis=1) - 1.0) <= 1e-9
    mixed_transient = bool(collapse.all() and not any(mixed[i] for i in recurrent))
    return ClassificationReport(absorbing, classes, transient, content_absorbing, discontent_closed, mixed_transient)


def brute_force_matching(means) -> OptimalMatching:
    """Enumerate every profile in [M]^K and keep the collision-free ones."""
    means = np.asarray(means, dtype=float)
    K, M = means.shape
    if K > M or M > 8:
        raise InstanceTooLarge(f"brute force needs K <= M <= 8, got K={K}, M={M}")
    totals = {}
    for profile in itertools.product(range(M), repeat=K):
        if len(set(profile)) == K:
            totals[profile] = sum(means[k, a] for k, a in enumerate(profile))
    ranked = sorted(totals.items(), key=lambda kv: kv[1], reverse=True)
    best, J1 = ranked[0]
    if len(ranked) > 1 and J1 - ranked[1][1] <= TIE_TOL:
        raise NonUniqueOptimalMatching("optimal matching is not unique", "means")
    J2 = ranked[1][1] if len(ranked) > 1 else 0.0
    return OptimalMatching(tuple(best), float(J1), float(J2), float(J1 - J2) / (2 * M))


def resistance_probe(build, source, target, grid=EPS_GRID, steps: int = 1) -> float:
    """Least-squares slope of log P_eps(source -> target) against log eps.

    ``build(eps)`` must return a :class:`ChainModel`; ``source``/``target`` are
    joint states as stored in ``state_list``.
    """
    logs = []
    for eps in grid:
        chain = build(eps)
        Pn = np.linalg.matrix_power(chain.P, steps)
        p = Pn[chain.index[source], chain.index[target]]
        if p <= 0:
            raise ZeroTransition(f"no {steps}-step transition at eps={eps}")
        logs.append(np.log(p))
    slope, _ = np.polyfit(np.log(grid), logs, 1)
    return float(slope)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
