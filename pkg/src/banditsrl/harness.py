"""Experiment runner: seeded repetitions, CSV persistence, regime stats.

A run is one simulated trajectory of a configured agent on a benchmark
instance.  Repetitions are independent: run r draws every random number
from a generator seeded with (master_seed, r), so any subset of runs can
be executed in any order, serially or across processes, and the merged
output is identical byte for byte.

Per-step draw order within a run is fixed and documented here because
replays depend on it: first the context sample, then whatever the
algorithm consumes (see base_algos), then the reward noise.

The results CSV has the fixed header
``run_id,t,cum_regret,phase,rep_id,glrt_triggered,n_active_reps,subopt_pulls``
where ``glrt_triggered`` is the step's own flag (0/1) and
``subopt_pulls`` is the running count of suboptimal actions up to t.
Rows are logged every ``log_every`` steps, at every phase boundary, and
at each of the final 1000 steps so tail rates can be recomputed from the
file alone.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from banditsrl import srl_core as sc
from banditsrl.base_algos import ALGO_KINDS, AlgoConfig, choose, igw_choose, leader_choose
from banditsrl.bandit_env import BENCHMARKS, build_benchmark
from banditsrl.linalg import RlsState

CSV_HEADER = ("run_id,t,cum_regret,phase,rep_id,glrt_triggered,"
              "n_active_reps,subopt_pulls")

TAIL_WINDOW = 1000


class HarnessError(ValueError):
    """Invalid run configuration or malformed results data."""


@dataclass(frozen=True)
class RunConfig:
    """One experiment: a benchmark, an agent, and bookkeeping knobs.

    ``srl=None`` runs the base algorithm bare on the instance's first
    map (or the min-over-maps optimism baseline when ``algo.kind`` is
    "leader"); otherwise the phased controller wraps the base algorithm.
    """

    benchmark: str
    algo: AlgoConfig = field(default_factory=AlgoConfig)
    srl: sc.SrlConfig | None = field(default_factory=sc.SrlConfig)
    horizon: int = 30000
    n_runs: int = 10
    seed: int = 0
    log_every: int = 100
    out_path: str = ""

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise HarnessError(
                f"unknown benchmark {self.benchmark!r}; known: {BENCHMARKS}")
        if self.horizon < 1:
            raise HarnessError(f"horizon must be >= 1, got {self.horizon}")
        if self.n_runs < 1:
            raise HarnessError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.log_every < 1:
            raise HarnessError(f"log_every must be >= 1, got {self.log_every}")
        if not 0 <= int(self.seed) < 2 ** 63:
            raise HarnessError("seed must be a nonnegative 64-bit integer")
        if self.srl is not None and self.algo.kind == "leader":
            raise HarnessError(
                "the leader baseline is standalone; disable srl to use it")

    @classmethod
    def from_dict(cls, payload):
        known = {f.name for f in fields(cls)}
        extra = set(payload) - known
        if extra:
            raise HarnessError(f"unknown run config keys: {sorted(extra)}")
        kwargs = dict(payload)
        if "algo" in kwargs:
            kwargs["algo"] = AlgoConfig.from_dict(kwargs["algo"])
        if "srl" in kwargs:
            if kwargs["srl"] == "disabled":
                kwargs["srl"] = None
            elif isinstance(kwargs["srl"], dict):
                kwargs["srl"] = sc.SrlConfig.from_dict(kwargs["srl"])
            else:
                raise HarnessError(
                    'srl must be a config object or the string "disabled"')
        if "benchmark" not in kwargs:
            raise HarnessError("run config needs a benchmark")
        return cls(**kwargs)

    def to_dict(self):
        return {
            "benchmark": self.benchmark,
            "algo": self.algo.to_dict(),
            "srl": "disabled" if self.srl is None else self.srl.to_dict(),
            "horizon": self.horizon,
            "n_runs": self.n_runs,
            "seed": self.seed,
            "log_every": self.log_every,
            "out_path": self.out_path,
        }


@dataclass(frozen=True)
class StepRecord:
    """One logged step of one run."""

    run_id: int
    t: int
    cum_regret: float
    phase: int
    rep_id: str
    glrt_triggered: bool
    n_active_reps: int
    subopt_pulls: int

    def to_row(self):
        return (f"{self.run_id},{self.t},{self.cum_regret!r},{self.phase},"
                f"{self.rep_id},{int(self.glrt_triggered)},"
                f"{self.n_active_reps},{self.subopt_pulls}")

    @classmethod
    def from_row(cls, line):
        parts = line.split(",")
        if len(parts) != 8:
            raise HarnessError(f"malformed CSV row: {line!r}")
        return cls(run_id=int(parts[0]), t=int(parts[1]),
                   cum_regret=float(parts[2]), phase=int(parts[3]),
                   rep_id=parts[4], glrt_triggered=bool(int(parts[5])),
                   n_active_reps=int(parts[6]), subopt_pulls=int(parts[7]))


@dataclass
class RegimeStats:
    """Aggregate shape of the regret curves across runs.

    Per-run lists are kept alongside the means because several regime
    checks are counts over runs, not averages.  ``elimination_time`` is
    the first boundary at which the active-set size matches the number
    of ground-truth realizable maps; ``hls_lock_time`` the first
    boundary from which the active map stays the diagnosing one.  Both
    are None when the ground truth is unknown and inf when the event
    never happens.
    """

    n_runs: int
    horizon: int
    final_regret_mean: float
    final_regret_std: float
    final_regret_runs: list
    tail_growth_mean: float
    tail_growth_runs: list
    loglog_slope_mean: float
    loglog_slope_runs: list
    elimination_time_runs: list
    hls_lock_time_runs: list
    glrt_tail_rate_mean: float
    glrt_tail_rate_runs: list

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class ExperimentResult:
    """Everything run_experiment produces: the logged records, the
    fitted stats, the safety/screening audit, and the instance."""

    records: list
    stats: RegimeStats
    audit: dict
    instance: object


def instance_info(inst):
    """Ground-truth labels the stats fitter needs from an instance."""
    return {"n_star": len(inst.star_ids),
            "hls_id": inst.meta.get("hls_id")}


def _blank_audit():
    return {"triggered_steps": 0, "triggered_realizable_steps": 0,
            "triggered_realizable_subopt": 0, "boundary_pairs": 0,
            "boundary_pairs_all_realizable": 0, "reentries": []}


def _simulate_run(payload):
    """Worker body: one full trajectory.  Top-level so process pools can
    import it; everything it needs rides in the payload tuple."""
    run_id, inst, cfg, keep_trace = payload
    rng = np.random.default_rng(np.random.SeedSequence((int(cfg.seed),
                                                        int(run_id))))
    rows = []
    audit = _blank_audit()
    trace = {"xs": [], "actions": []} if keep_trace else None
    stars = set(inst.star_ids)
    horizon, log_every = cfg.horizon, cfg.log_every
    tail_from = horizon - TAIL_WINDOW
    cum_regret = 0.0
    subopt = 0

    if cfg.srl is not None:
        sim = _SrlSim(inst, cfg)
    elif cfg.algo.kind == "leader":
        sim = _LeaderSim(inst, cfg)
    else:
        sim = _BareSim(inst, cfg)

    for t in range(1, horizon + 1):
        x = inst.sample_context(rng)
        a, triggered = sim.step(x, t, rng)
        y = inst.step(x, a, rng)
        boundary = sim.feed(x, a, y, triggered)
        cum_regret += float(inst.gaps[x, a])
        is_subopt = a != inst.opt_actions[x]
        subopt += int(is_subopt)
        if triggered:
            audit["triggered_steps"] += 1
            if sim.active_id() in stars:
                audit["triggered_realizable_steps"] += 1
                audit["triggered_realizable_subopt"] += int(is_subopt)
        if boundary:
            audit["boundary_pairs"] += 1
            phi = set(sim.phi_ids())
            if stars <= phi:
                audit["boundary_pairs_all_realizable"] += 1
            for rep_id in sim.reentered():
                audit["reentries"].append((run_id, t, rep_id))
        if keep_trace:
            trace["xs"].append(int(x))
            trace["actions"].append(int(a))
        if boundary or t % log_every == 0 or t > tail_from or t == horizon:
            rows.append(StepRecord(
                run_id=run_id, t=t, cum_regret=cum_regret,
                phase=sim.phase(), rep_id=sim.active_id(),
                glrt_triggered=bool(triggered),
                n_active_reps=len(sim.phi_ids()), subopt_pulls=subopt))
    if keep_trace:
        audit["trace"] = trace
    return run_id, rows, audit


class _BareSim:
    """Base algorithm on the instance's first map, no screening."""

    def __init__(self, inst, cfg):
        self.rep = inst.reps[0]
        self.cfg = cfg.algo
        self.rls = RlsState(self.rep.d, lam=cfg.algo.lam)
        self.frozen_theta = None

    def step(self, x, t, rng):
        if self.cfg.kind == "igw" and not self.cfg.igw_refit:
            if t & (t - 1) == 0:  # refresh estimate at 1, 2, 4, 8, ...
                self.frozen_theta = self.rls.theta.copy()
            a = igw_choose(x, self.rep, self.rls, self.cfg, t, rng,
                           theta=self.frozen_theta)
        else:
            a = choose(x, self.rep, self.rls, self.cfg, t, rng)
        return a, False

    def feed(self, x, a, y, triggered):
        self.rls.update(self.rep.features[x, a], y)
        return False

    def active_id(self):
        return self.rep.id

    def phi_ids(self):
        return (self.rep.id,)

    def phase(self):
        return 0

    def reentered(self):
        return ()


class _LeaderSim:
    """Min-over-maps optimism baseline; keeps one state per map."""

    def __init__(self, inst, cfg):
        self.reps = inst.reps
        self.cfg = cfg.algo
        self.states = [RlsState(rep.d, lam=cfg.algo.lam)
                       for rep in self.reps]

    def step(self, x, t, rng):
        return leader_choose(x, self.reps, self.states, self.cfg), False

    def feed(self, x, a, y, triggered):
        for rep, rls in zip(self.reps, self.states):
            rls.update(rep.features[x, a], y)
        return False

    def active_id(self):
        return "leader"

    def phi_ids(self):
        return tuple(rep.id for rep in self.reps)

    def phase(self):
        return 0

    def reentered(self):
        return ()


class _SrlSim:
    """Phased controller around the configured base algorithm."""

    def __init__(self, inst, cfg):
        self.inst = inst
        self.cfg = cfg.srl
        self.base_cfg = cfg.algo
        self.state = sc.SrlState.fresh(inst.reps, cfg.srl, cfg.algo)
        self._last_reentered = ()
        self._ever_removed = set()
        self._prev_phi = set(self.state.phi_t)
        if cfg.srl.loss == "bic":
            self._bic_bound = _bic_regret_bound(inst, cfg)
            self._bic_gap = inst.min_gap
        else:
            self._bic_bound = None
            self._bic_gap = None

    def step(self, x, t, rng):
        a, diag = sc.srl_step(self.state, x, self.cfg, self.base_cfg, rng)
        return a, diag["triggered"]

    def feed(self, x, a, y, triggered):
        sc.feed_reward(self.state, x, a, y, triggered)
        kwargs = {}
        if self._bic_bound is not None:
            t = self.state.t
            worst = max(self._bic_bound(t, rep.d) for rep in self.inst.reps)
            kwargs = {"bic_regret_bound": self._bic_bound,
                      "bic_subopt_bound": sc.subopt_pull_form(
                          t, self._bic_gap, worst)}
        fired = sc.srl_phase_boundary(self.state, self.cfg, self.base_cfg,
                                      **kwargs)
        if fired:
            phi = set(self.state.phi_t)
            removed = self._prev_phi - phi
            self._ever_removed |= removed
            back = phi & self._ever_removed
            self._ever_removed -= back
            self._last_reentered = tuple(sorted(back))
            self._prev_phi = phi
        return fired

    def active_id(self):
        return self.state.active_rep

    def phi_ids(self):
        return tuple(self.state.phi_t)

    def phase(self):
        return self.state.j

    def reentered(self):
        return self._last_reentered


def _bic_regret_bound(inst, cfg):
    n_reps = len(inst.reps)
    delta = cfg.srl.delta
    gap = inst.min_gap
    n_actions = inst.actions
    if cfg.algo.kind in ("eps_greedy", "igw"):
        def bound(t, d):
            return sc.eps_greedy_regret_form(t, d, n_actions, n_reps, delta)
    else:
        def bound(t, d):
            return sc.linucb_regret_form(t, d, n_reps, delta, gap)
    return bound


def run_experiment(cfg, workers=1, keep_traces=False):
    """Execute cfg.n_runs independent trajectories and aggregate them.

    ``workers`` > 1 fans runs out over processes; the output is
    identical to the serial result because each run owns its seed.
    """
    if not isinstance(cfg, RunConfig):
        raise HarnessError("cfg must be a RunConfig")
    inst = build_benchmark(cfg.benchmark, seed=cfg.seed)
    payloads = [(run_id, inst, cfg, keep_traces)
                for run_id in range(cfg.n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_simulate_run, payloads))
    else:
        outcomes = [_simulate_run(p) for p in payloads]
    outcomes.sort(key=lambda item: item[0])

    records = []
    audit = _blank_audit()
    audit["per_run"] = {}
    for run_id, rows, run_audit in outcomes:
        records.extend(rows)
        audit["per_run"][run_id] = run_audit
        for key in ("triggered_steps", "triggered_realizable_steps",
                    "triggered_realizable_subopt", "boundary_pairs",
                    "boundary_pairs_all_realizable"):
            audit[key] += run_audit[key]
        audit["reentries"].extend(run_audit["reentries"])

    stats = fit_regime(records, horizon=cfg.horizon,
                       info=instance_info(inst))
    if cfg.out_path:
        write_csv(cfg.out_path, records)
    return ExperimentResult(records=records, stats=stats, audit=audit,
                            instance=inst)


def fit_regime(records, horizon=None, info=None):
    """Compute RegimeStats from logged records.

    Works identically on in-memory records and on records parsed back
    from a results CSV; the ground-truth-dependent fields need ``info``
    (see instance_info) and are None without it.
    """
    if not records:
        raise HarnessError("no records to fit")
    by_run = {}
    for rec in records:
        by_run.setdefault(rec.run_id, []).append(rec)
    if horizon is None:
        horizon = max(rec.t for rec in records)
    finals, tails, slopes, elims, locks, tail_rates = [], [], [], [], [], []
    for run_id in sorted(by_run):
        rows = sorted(by_run[run_id], key=lambda r: r.t)
        if len(rows) < 10:
            raise HarnessError(
                f"run {run_id} has {len(rows)} logged points; need >= 10")
        finals.append(rows[-1].cum_regret)
        tails.append(_tail_growth(rows, horizon))
        slopes.append(_loglog_slope(rows, horizon))
        boundaries = _boundary_rows(rows)
        elims.append(_elimination_time(boundaries, info))
        locks.append(_lock_time(rows, boundaries, info))
        tail_rates.append(_tail_rate(rows, horizon))
    return RegimeStats(
        n_runs=len(by_run), horizon=int(horizon),
        final_regret_mean=float(np.mean(finals)),
        final_regret_std=float(np.std(finals)),
        final_regret_runs=finals,
        tail_growth_mean=float(np.mean(tails)), tail_growth_runs=tails,
        loglog_slope_mean=float(np.mean(slopes)), loglog_slope_runs=slopes,
        elimination_time_runs=elims, hls_lock_time_runs=locks,
        glrt_tail_rate_mean=float(np.mean(tail_rates)),
        glrt_tail_rate_runs=tail_rates)


def _tail_growth(rows, horizon):
    cutoff = 0.8 * horizon
    base = None
    for rec in rows:
        if rec.t <= cutoff:
            base = rec.cum_regret
    if base is None:
        base = 0.0
    return rows[-1].cum_regret - base


def _loglog_slope(rows, horizon):
    pts = [(rec.t, rec.cum_regret) for rec in rows
           if rec.t >= horizon / 10.0 and rec.cum_regret > 0.0]
    if len(pts) < 2:
        return 0.0
    ts = np.log([p[0] for p in pts])
    cs = np.log([p[1] for p in pts])
    if np.ptp(ts) == 0.0:
        return 0.0
    return float(np.polyfit(ts, cs, 1)[0])


def _boundary_rows(rows):
    out = []
    prev_phase = 0
    for rec in rows:
        if rec.phase > prev_phase:
            out.append(rec)
        prev_phase = rec.phase
    return out


def _elimination_time(boundaries, info):
    if info is None or info.get("n_star") is None:
        return None
    for rec in boundaries:
        if rec.n_active_reps == info["n_star"]:
            return float(rec.t)
    return math.inf


def _lock_time(rows, boundaries, info):
    if info is None or info.get("hls_id") is None:
        return None
    hls_id = info["hls_id"]
    last_bad = -1
    for rec in rows:
        if rec.rep_id != hls_id:
            last_bad = max(last_bad, rec.t)
    if last_bad == -1:
        return 0.0
    later = [rec.t for rec in boundaries if rec.t > last_bad]
    return float(min(later)) if later else math.inf


def _tail_rate(rows, horizon):
    window = [rec for rec in rows if rec.t > horizon - TAIL_WINDOW]
    if not window:
        return 0.0
    return float(np.mean([1.0 if rec.glrt_triggered else 0.0
                          for rec in window]))


def write_csv(path, records):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    lines = [CSV_HEADER]
    lines.extend(rec.to_row() for rec in records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise HarnessError(f"{path}: missing or unexpected CSV header")
    return [StepRecord.from_row(ln) for ln in lines[1:]]
