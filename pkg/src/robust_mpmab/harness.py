"""Experiment specs, the epoch loop, Monte-Carlo replication and result files."""
from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import adversary as adv
from .adversary import Phase, PhaseTag, attack_block
from .comms import BitBus, expected_bits
from .errors import InvalidSpec, ParseError, ValidationError
from .exploration import ExplorationState, finalize_estimates, run_exploration_phase
from .matching import MatchParams, exploit_action, run_matching_phase
from .metrics import OptimalMatching, RegretLedger, optimal_matching
from .model import BetaRewards, DeterministicRewards, SystemConfig, validate_config

WORKERS_ENV = "ROBUST_MPMAB_WORKERS"
SYSTEM_KEYS = ("K", "M", "means", "reward_model", "delta_exp", "epsilon", "kappa", "beta",
               "T0", "c2", "c3", "epochs", "base_seed")
OPTIONAL_KEYS = ("adversary", "replications", "stride", "trace", "oracle_checks", "horizon",
                 "exploration", "matching")
EXPLOIT_CHUNK = 1 << 20


@dataclass(frozen=True)
class ExperimentSpec:
    system: SystemConfig
    adversary: adv.AdversarySpec = field(default_factory=adv.NoAdversary)
    replications: int = 1
    stride: int = 100
    trace: bool = False
    oracle_checks: bool = False
    horizon: int | None = None
    count_while_waiting: bool = True
    sync_snapshot: str = "post_update"

    def with_system(self, **changes) -> "ExperimentSpec":
        from dataclasses import replace

        return replace(self, system=replace(self.system, **changes))


@dataclass
class RunResult:
    seed: int
    ledger: RegretLedger
    estimates: list
    exploit_profiles: list
    comm_bits: dict
    taus: list
    counters: dict
    trace: list | None = None
    wall_clock: float = 0.0


# ---------------------------------------------------------------- parsing


def _require(doc: dict, key: str, prefix: str = ""):
    if key not in doc:
        raise ParseError("missing required field", prefix + key)
    return doc[key]


def _check_keys(doc: dict, allowed, prefix: str = "") -> None:
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object", prefix.rstrip(".") or None)
    for key in doc:
        if key not in allowed:
            raise ParseError("unknown key", prefix + key)


def _number(doc, key, kind=float, prefix=""):
    v = _require(doc, key, prefix)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"expected a number, got {v!r}", prefix + key)
    if kind is int:
        if float(v) != int(v):
            raise ParseError(f"expected an integer, got {v!r}", prefix + key)
        return int(v)
    return float(v)


def _parse_reward_model(doc):
    _check_keys(doc, ("type", "nu"), "reward_model.")
    kind = _require(doc, "type", "reward_model.")
    if kind == "beta":
        return BetaRewards(nu=float(doc.get("nu", 2.0)))
    if kind == "deterministic":
        return DeterministicRewards()
    raise ParseError(f"unknown reward model {kind!r}", "reward_model.type")


def _parse_phases(names, prefix):
    try:
        return frozenset(Phase(n) for n in names)
    except ValueError as exc:
        raise ParseError(str(exc), prefix + "active_phases") from None


def _parse_adversary(doc, M: int, base: Path | None):
    p = "adversary."
    kind = _require(doc, "type", p)
    if kind == "none":
        _check_keys(doc, ("type",), p)
        return adv.NoAdversary()
    if kind == "iid_single_arm":
        _check_keys(doc, ("type", "p", "active_phases"), p)
        phases = doc.get("active_phases", ["exploration", "matching"])
        return adv.IidSingleArm(_number(doc, "p", prefix=p), _parse_phases(phases, p))
    if kind == "iid_per_arm":
        _check_keys(doc, ("type", "p", "active_phases"), p)
        phases = doc.get("active_phases", [ph.value for ph in Phase])
        return adv.IidPerArm(tuple(float(x) for x in _require(doc, "p", p)), _parse_phases(phases, p))
    if kind == "schedule":
        _check_keys(doc, ("type", "path", "entries", "period"), p)
        period = doc.get("period")
        if "path" in doc:
            path = Path(doc["path"])
            if base is not None and not path.is_absolute():
                path = base / path
            return adv.load_schedule_csv(path, M, period)
        entries = {int(t) - 1: tuple(int(x) for x in w) for t, w in _require(doc, "entries", p)}
        return adv.Schedule(entries, period)
    raise ParseError(f"unknown adversary type {kind!r}", p + "type")


def spec_from_dict(doc: dict, base: Path | None = None) -> ExperimentSpec:
    _check_keys(doc, SYSTEM_KEYS + OPTIONAL_KEYS)
    for key in SYSTEM_KEYS:
        _require(doc, key)
    means = doc["means"]
    if not (isinstance(means, list) and all(isinstance(r, list) for r in means)):
        raise ParseError("expected a K x M nested list", "means")
    system = SystemConfig(
        K=_number(doc, "K", int), M=_number(doc, "M", int), means=np.array(means, dtype=float),
        reward_model=_parse_reward_model(doc["reward_model"]),
        delta_exp=_number(doc, "delta_exp"), epsilon=_number(doc, "epsilon"),
        kappa=_number(doc, "kappa"), beta=_number(doc, "beta"),
        T0=_number(doc, "T0", int), c2=_number(doc, "c2", int), c3=_number(doc, "c3", int),
        epochs=_number(doc, "epochs", int), base_seed=_number(doc, "base_seed", int),
    )
    if system.epochs < 1:
        raise InvalidSpec("need at least one epoch", "epochs")
    validate_config(system)
    adversary = _parse_adversary(doc.get("adversary", {"type": "none"}), system.M, base)
    adv.validate_spec(adversary, system.M)

    exploration = doc.get("exploration", {})
    _check_keys(exploration, ("count_while_waiting",), "exploration.")
    matching = doc.get("matching", {})
    _check_keys(matching, ("sync_snapshot",), "matching.")
    snapshot = matching.get("sync_snapshot", "post_update")
    if snapshot not in ("post_update", "pre_update"):
        raise ValidationError(f"unknown snapshot {snapshot!r}", "matching.sync_snapshot")
    spec = ExperimentSpec(
        system=system, adversary=adversary,
        replications=int(doc.get("replications", 1)), stride=int(doc.get("stride", 100)),
        trace=bool(doc.get("trace", False)), oracle_checks=bool(doc.get("oracle_checks", False)),
        horizon=doc.get("horizon"),
        count_while_waiting=bool(exploration.get("count_while_waiting", True)),
        sync_snapshot=snapshot,
    )
    return validate_spec(spec)


def validate_spec(spec: ExperimentSpec) -> ExperimentSpec:
    if spec.system.epochs < 1:
        raise InvalidSpec("need at least one epoch", "epochs")
    if spec.replications < 1:
        raise InvalidSpec("replications must be >= 1", "replications")
    if spec.stride < 1:
        raise InvalidSpec("stride must be >= 1", "stride")
    if spec.horizon is not None and spec.horizon < 1:
        raise InvalidSpec("horizon must be >= 1", "horizon")
    return spec


def parse_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return spec_from_dict(doc, base=path.parent)


def bundled_spec(name: str) -> ExperimentSpec:
    text = (resources.files("robust_mpmab") / "configs" / f"{name}.json").read_text()
    return spec_from_dict(json.loads(text))


# ---------------------------------------------------------------- simulation


def _exploit_regrets(means, opt: OptimalMatching, profile, attacks: np.ndarray) -> np.ndarray:
    K, M = means.shape
    profile = np.asarray(profile, dtype=int)
    n = np.bincount(profile, minlength=M)
    base = np.where(n[profile] == 1, means[np.arange(K), profile], 0.0)
    got = (1 - attacks[:, profile]) @ base
    return np.maximum(opt.J1 - got, 0.0)


def run_single(spec: ExperimentSpec, seed: int | None = None) -> RunResult:
    """One run of the epoch policy: exploration, matching and exploitation per epoch."""
    validate_spec(spec)
    start = time.perf_counter()
    cfg = spec.system
    K, M = cfg.K, cfg.M
    seed = cfg.base_seed if seed is None else seed
    opt = optimal_matching(cfg.means)
    rng_reward, rng_adv, rng_players = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))

    ledger = RegretLedger(stride=spec.stride, horizon=spec.horizon)
    bus = BitBus(K)
    xstate = ExplorationState(K, M, count_while_waiting=spec.count_while_waiting)
    counters, estimates, profiles, taus = {}, [], [], []
    trace = [] if spec.trace else None

    for epoch in range(1, cfg.epochs + 1):
        rec = ledger.epoch_record(epoch)
        rec.t_start, rec.regret_start = ledger.t, ledger.cumulative_regret
        rec.exploration_steps = run_exploration_phase(
            cfg, epoch, xstate, spec.adversary, bus, rng_reward, rng_adv, ledger, opt)
        if not xstate.complete:
            break
        est = finalize_estimates(xstate)
        estimates.append(est)
        rec.estimates = est.tolist()

        params = MatchParams.from_config(cfg, epoch, spec.sync_snapshot)
        t_before = ledger.t
        counters[epoch], _ = run_matching_phase(
            cfg, est, params, spec.adversary, bus, rng_players, rng_reward, rng_adv,
            epoch=epoch, ledger=ledger, opt=opt, trace=trace)
        rec.matching_steps = ledger.t - t_before
        if rec.matching_steps < params.tau:
            break
        taus.append(params.tau)

        profile = [exploit_action(counters, k, epoch, est) for k in range(K)]
        profiles.append(profile)
        ledger.epoch_flags(epoch, est, cfg.means, opt.Delta, profile, opt.a_star)
        rec.exploit_profile = profile
        rec.t_exploit_start, rec.regret_exploit_start = ledger.t, ledger.cumulative_regret

        tag = PhaseTag(Phase.EXPLOITATION, epoch)
        remaining = ledger.room(cfg.exploit_length(epoch))
        while remaining > 0:
            n = min(remaining, EXPLOIT_CHUNK)
            attacks = attack_block(spec.adversary, ledger.t, n, tag, M, rng_adv)
            ledger.record_block(tag, _exploit_regrets(cfg.means, opt, profile, attacks), attacks.any(axis=1))
            rec.exploitation_steps += n
            remaining -= n
        rec.t_end, rec.regret_end = ledger.t, ledger.cumulative_regret
        if ledger.exhausted:
            break

    return RunResult(seed=seed, ledger=ledger, estimates=estimates, exploit_profiles=profiles,
                     comm_bits=bus.budget_report(), taus=taus, counters=counters, trace=trace,
                     wall_clock=time.perf_counter() - start)


def _worker_count(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    return max(1, workers)


def _run_seed(args):
    spec, seed = args
    return run_single(spec, seed)


@dataclass
class ReplicationResult:
    spec: ExperimentSpec
    runs: list
    t: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    def summary(self) -> dict:
        return replication_summary(self)


def run_replications(spec: ExperimentSpec, seeds=None, workers: int | None = None) -> ReplicationResult:
    """Run replications with seeds ``base_seed + 1 .. base_seed + R`` (or ``seeds``)."""
    validate_spec(spec)
    if seeds is None:
        seeds = [spec.system.base_seed + r for r in range(1, spec.replications + 1)]
    workers = _worker_count(workers)
    jobs = [(spec, s) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_seed, jobs))
    else:
        runs = [_run_seed(j) for j in jobs]
    n = min(len(r.ledger.series) for r in runs)
    mat = np.array([r.ledger.series[:n] for r in runs]).reshape(len(runs), n)
    t = spec.stride * np.arange(1, n + 1)
    # centre on the first run so identical runs give exactly zero spread
    d = mat - mat[:1]
    return ReplicationResult(spec, runs, t, mat[0] + d.mean(axis=0), d.std(axis=0))


# ---------------------------------------------------------------- summaries and files


def _matching_info(spec: ExperimentSpec) -> dict:
    opt = optimal_matching(spec.system.means)
    return {"J1": opt.J1, "J2": opt.J2, "Delta": opt.Delta, "a_star": [a + 1 for a in opt.a_star]}


def _epoch_dict(rec) -> dict:
    return {
        "epoch": rec.epoch,
        "exploration_steps": rec.exploration_steps,
        "matching_steps": rec.matching_steps,
        "exploitation_steps": rec.exploitation_steps,
        "exploration_success": rec.exploration_success,
        "matching_success": rec.matching_success,
        "max_estimate_error": rec.max_estimate_error,
        "exploit_profile": None if rec.exploit_profile is None else [a + 1 for a in rec.exploit_profile],
        "estimates": rec.estimates,
    }


def run_summary(spec: ExperimentSpec, result: RunResult) -> dict:
    led = result.ledger
    return {
        **_matching_info(spec),
        "seed": result.seed,
        "total_steps": led.t,
        "cumulative_regret": led.cumulative_regret,
        "regret_by_phase": {p.value: v for p, v in led.regret_by_phase.items()},
        "W": {p.value: v for p, v in led.W.items()},
        "steps_by_phase": {p.value: v for p, v in led.steps_by_phase.items()},
        "epochs": [_epoch_dict(r) for r in led.epochs],
        "comm_bits": result.comm_bits,
        "comm_bits_expected": expected_bits(spec.system.M, result.taus),
        "wall_clock_s": result.wall_clock,
    }


def replication_summary(rep: ReplicationResult) -> dict:
    spec = rep.spec
    per_epoch = []
    for e in range(1, spec.system.epochs + 1):
        recs = [rec for r in rep.runs for rec in r.ledger.epochs if rec.epoch == e and rec.matching_success is not None]
        if not recs:
            continue
        per_epoch.append({
            "epoch": e,
            "runs": len(recs),
            "exploration_success_rate": float(np.mean([r.exploration_success for r in recs])),
            "matching_success_rate": float(np.mean([r.matching_success for r in recs])),
            "mean_exploration_steps": float(np.mean([r.exploration_steps for r in recs])),
        })
    W = {p.value: [r.ledger.W[p] for r in rep.runs] for p in Phase}
    return {
        **_matching_info(spec),
        "replications": len(rep.runs),
        "seeds": [r.seed for r in rep.runs],
        "final_cum_regret_mean": float(np.mean([r.ledger.cumulative_regret for r in rep.runs])),
        "final_cum_regret_std": float(np.std([r.ledger.cumulative_regret for r in rep.runs])),
        "per_epoch": per_epoch,
        "W_mean": {k: float(np.mean(v)) for k, v in W.items()},
        "W": W,
        "comm_bits": [r.comm_bits["per_player"] for r in rep.runs],
        "comm_bits_expected": [expected_bits(spec.system.M, r.taus) for r in rep.runs],
        "wall_clock_s": float(sum(r.wall_clock for r in rep.runs)),
    }


def write_regret_csv(path, t, mean, std) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean_cum_regret", "std_cum_regret"])
        for row in zip(t, mean, std):
            w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2]))])


def write_trace_csv(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "t", "player", "action", "utility", "mood", "baseline_action"])
        for epoch, t, k, a, u, content, base in trace:
            w.writerow([epoch, t + 1, k + 1, a + 1, repr(u), "C" if content else "D", base + 1])


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_run(out_dir, spec: ExperimentSpec, result: RunResult) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series = np.array(result.ledger.series)
    t = spec.stride * np.arange(1, len(series) + 1)
    write_regret_csv(out / "regret.csv", t, series, np.zeros_like(series))
    summary = run_summary(spec, result)
    write_json(out / "summary.json", summary)
    if result.trace is not None:
        write_trace_csv(out / "trace.csv", result.trace)
    return summary


def write_replications(out_dir, rep: ReplicationResult) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_regret_csv(out / "regret.csv", rep.t, rep.mean, rep.std)
    summary = rep.summary()
    write_json(out / "summary.json", summary)
    return summary


def figure1_spec(scale: str = "reduced", adversary_enabled: bool = True, replications: int | None = None) -> ExperimentSpec:
    if scale not in ("paper", "reduced"):
        raise ValueError(f"scale must be 'paper' or 'reduced', got {scale!r}")
    from dataclasses import replace

    spec = bundled_spec("figure1" if scale == "paper" else "figure1_reduced")
    if not adversary_enabled:
        spec = replace(spec, adversary=adv.NoAdversary())
    if replications is not None:
        spec = replace(spec, replications=replications)
    return spec


def reproduce_figure1(scale: str = "reduced", out_dir=None, workers: int | None = None,
                      adversary_enabled: bool = True, replications: int | None = None) -> ReplicationResult:
    rep = run_replications(figure1_spec(scale, adversary_enabled, replications), workers=workers)
    if out_dir is not None:
        write_replications(out_dir, rep)
    return rep
