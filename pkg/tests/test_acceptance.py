"""Acceptance suite: full-scale regime properties plus oracle parity.

Each criterion prints one PASS/FAIL verdict line directly to the real
stdout so the verdicts are visible even under pytest output capture.
The experiment fixtures are module-scoped because several criteria
share the same batch of runs.
"""

import math
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from banditsrl import srl_core as sc
from banditsrl.bandit_env import Representation
from banditsrl.base_algos import AlgoConfig
from banditsrl.harness import RunConfig, run_experiment
from banditsrl.linalg import RlsState, constrained_ls, min_eigenvalue

from oracles import (charpoly_min_eig, direct_rls, glr_direct,
                     grid_constrained_ls_1d, projected_gradient_ls)

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

HORIZON = 30000
N_RUNS = 10

_capman = None


@pytest.fixture(autouse=True, scope="module")
def _verdicts_reach_terminal(request):
    # File-descriptor capture would swallow verdict lines of passing
    # tests; route them around it.
    global _capman
    _capman = request.config.pluginmanager.getplugin("capturemanager")
    yield


def _report(num, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    line = f"\nACCEPTANCE {num} {verdict}: {detail}"
    if _capman is not None:
        with _capman.global_and_fixture_disabled():
            print(line, flush=True)
    else:
        print(line, file=sys.__stdout__, flush=True)


def _timed(cfg):
    t0 = time.monotonic()
    res = run_experiment(cfg)
    return res, time.monotonic() - t0


def _full_cfg(benchmark, kind, loss=None, srl_off=False):
    srl = None if srl_off else sc.SrlConfig(loss=loss or "eig")
    return RunConfig(benchmark=benchmark, algo=AlgoConfig(kind=kind),
                     srl=srl, horizon=HORIZON, n_runs=N_RUNS, seed=0,
                     log_every=100)


@pytest.fixture(scope="module")
def single_rep_runs():
    return _timed(_full_cfg("single_rep_hls", "linucb"))


@pytest.fixture(scope="module")
def vardim_linucb():
    return _timed(_full_cfg("varying_dim", "linucb"))


@pytest.fixture(scope="module")
def vardim_eps():
    return _timed(_full_cfg("varying_dim", "eps_greedy"))


@pytest.fixture(scope="module")
def nohls_eps():
    return _timed(_full_cfg("varying_dim_no_hls", "eps_greedy"))


@pytest.fixture(scope="module")
def nohls_linucb():
    return _timed(_full_cfg("varying_dim_no_hls", "linucb"))


@pytest.fixture(scope="module")
def weak_loss_runs():
    return _timed(_full_cfg("weak_hls", "linucb", loss="weak"))


@pytest.fixture(scope="module")
def eig_loss_runs():
    return _timed(_full_cfg("weak_hls", "linucb", loss="eig"))


@pytest.fixture(scope="module")
def mixing_leader():
    return _timed(_full_cfg("mixing", "leader", srl_off=True))


@pytest.fixture(scope="module")
def mixing_srl():
    return _timed(_full_cfg("mixing", "linucb"))


def test_criterion_1_constant_regret_with_hls(single_rep_runs):
    res, elapsed = single_rep_runs
    s = res.stats
    good = sum(1 for tail, final, rate in zip(s.tail_growth_runs,
                                              s.final_regret_runs,
                                              s.glrt_tail_rate_runs)
               if tail <= 0.02 * final and rate >= 0.99)
    ok = good >= 9 and elapsed <= 120.0
    _report(1, ok, f"flat and certified tail in {good}/10 runs, "
                   f"final regret {s.final_regret_mean:.1f}, "
                   f"{elapsed:.0f}s (limit 120s)")
    assert ok


def test_criterion_2_full_pipeline_on_varying_dim(vardim_linucb, vardim_eps):
    lin, t_lin = vardim_linucb
    eps, t_eps = vardim_eps
    elim_finite = sum(math.isfinite(v)
                      for v in lin.stats.elimination_time_runs
                      + eps.stats.elimination_time_runs)
    lock_lin = sum(math.isfinite(v) for v in lin.stats.hls_lock_time_runs)
    lock_eps = sum(math.isfinite(v) for v in eps.stats.hls_lock_time_runs)
    tail_ok = (lin.stats.tail_growth_mean
               <= 0.05 * lin.stats.final_regret_mean
               and eps.stats.tail_growth_mean
               <= 0.05 * eps.stats.final_regret_mean)
    # uniform exploration should cost more than optimism; compared per
    # paired run so one tolerated non-locking run cannot flip the mean
    order = sum(1 for fe, fl in zip(eps.stats.final_regret_runs,
                                    lin.stats.final_regret_runs) if fe > fl)
    elapsed = t_lin + t_eps
    ok = (elim_finite == 20 and lock_lin >= 9 and lock_eps >= 9
          and tail_ok and order >= 8 and elapsed <= 600.0)
    _report(2, ok, f"elimination finite {elim_finite}/20, lock "
                   f"{lock_lin}/10 and {lock_eps}/10, tails flat={tail_ok}, "
                   f"eps above linucb in {order}/10 paired runs, "
                   f"{elapsed:.0f}s (limit 600s)")
    assert ok


def test_criterion_3_no_hls_polynomial_regime(nohls_eps, nohls_linucb):
    eps, _ = nohls_eps
    lin, _ = nohls_linucb
    s_eps = eps.stats.loglog_slope_mean
    s_lin = lin.stats.loglog_slope_mean
    ok = 0.55 <= s_eps <= 0.80 and s_lin <= s_eps - 0.1
    _report(3, ok, f"eps slope {s_eps:.3f} in [0.55, 0.80], linucb slope "
                   f"{s_lin:.3f} <= {s_eps - 0.1:.3f}")
    assert ok


def test_criterion_4_weak_hls_loss_separation(weak_loss_runs, eig_loss_runs):
    weak, _ = weak_loss_runs
    eig, _ = eig_loss_runs
    good = sum(1 for tw, fw, te in zip(weak.stats.tail_growth_runs,
                                       weak.stats.final_regret_runs,
                                       eig.stats.tail_growth_runs)
               if tw <= 0.05 * fw and te >= 3.0 * tw)
    ok = good >= 8
    _report(4, ok, f"weak flat and eig >= 3x weak tail in {good}/10 paired "
                   f"runs (weak tail mean {weak.stats.tail_growth_mean:.2f}, "
                   f"eig tail mean {eig.stats.tail_growth_mean:.2f})")
    assert ok


def test_criterion_5_mixing_leader_ordering(mixing_leader, mixing_srl):
    leader, _ = mixing_leader
    srl, _ = mixing_srl
    good = sum(1 for fl, fs in zip(leader.stats.final_regret_runs,
                                   srl.stats.final_regret_runs) if fl < fs)
    ok = good >= 8
    _report(5, ok, f"leader below controller in {good}/10 paired runs "
                   f"(leader {leader.stats.final_regret_mean:.1f}, "
                   f"controller {srl.stats.final_regret_mean:.1f})")
    assert ok


def test_criterion_6_glrt_safety(vardim_linucb, vardim_eps):
    lin, _ = vardim_linucb
    eps, _ = vardim_eps
    steps = (lin.audit["triggered_realizable_steps"]
             + eps.audit["triggered_realizable_steps"])
    bad = (lin.audit["triggered_realizable_subopt"]
           + eps.audit["triggered_realizable_subopt"])
    frac = bad / steps if steps else 1.0
    ok = steps > 0 and frac <= 0.01
    _report(6, ok, f"{bad} suboptimal of {steps} certified steps "
                   f"(fraction {frac:.2e} <= 0.01)")
    assert ok


def test_criterion_7_realizable_survival(vardim_linucb, vardim_eps):
    lin, _ = vardim_linucb
    eps, _ = vardim_eps
    pairs = lin.audit["boundary_pairs"] + eps.audit["boundary_pairs"]
    full = (lin.audit["boundary_pairs_all_realizable"]
            + eps.audit["boundary_pairs_all_realizable"])
    frac = full / pairs if pairs else 0.0
    ok = pairs > 0 and frac >= 0.99
    _report(7, ok, f"all realizable maps survived at {full}/{pairs} "
                   f"(run, boundary) pairs (fraction {frac:.4f} >= 0.99)")
    assert ok


def test_criterion_8_oracle_equivalences():
    t0 = time.monotonic()
    rng = np.random.default_rng(0)

    worst_eig = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        m = rng.standard_normal((d, d))
        s = 0.5 * (m + m.T)
        worst_eig = max(worst_eig,
                        abs(min_eigenvalue(s) - charpoly_min_eig(s)))

    worst_sm = 0.0
    worst_warm = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 6))
        n = int(rng.integers(10, 200))
        lam = float(rng.uniform(0.5, 2.0))
        phis = rng.standard_normal((n, d))
        ys = phis @ rng.standard_normal(d) + 0.1 * rng.standard_normal(n)
        rls = RlsState(d, lam=lam)
        for p, y in zip(phis, ys):
            rls.update(p, float(y))
        _, vinv, theta = direct_rls(phis, ys, lam)
        worst_sm = max(worst_sm, float(np.abs(rls.Vinv.a - vinv).max()),
                       float(np.abs(rls.theta - theta).max()))
        batch = RlsState.from_data(phis, ys, lam=lam)
        worst_warm = max(worst_warm,
                         float(np.abs(rls.V.a - batch.V.a).max()),
                         float(np.abs(rls.theta - batch.theta).max()))

    worst_ls = 0.0
    for _ in range(25):
        n = int(rng.integers(5, 40))
        bound = float(rng.uniform(0.2, 2.0))
        phis = rng.standard_normal((n, 1))
        ys = rng.standard_normal(n)
        _, got = constrained_ls((phis, ys), bound=bound)
        _, want = grid_constrained_ls_1d(phis[:, 0], ys, bound)
        worst_ls = max(worst_ls, abs(got - want))
    for _ in range(10):
        d = int(rng.integers(2, 4))
        n = int(rng.integers(8, 40))
        bound = float(rng.uniform(0.2, 1.5))
        phis = rng.standard_normal((n, d))
        ys = rng.standard_normal(n)
        _, got = constrained_ls((phis, ys), bound=bound)
        _, want = projected_gradient_ls(phis, ys, bound)
        worst_ls = max(worst_ls, abs(got - want))

    worst_glr = 0.0
    for _ in range(100):
        feats = rng.standard_normal((5, 4, 3))
        rep = Representation("r", feats, B=1.0)
        rls = RlsState(3)
        for _ in range(int(rng.integers(5, 30))):
            rls.update(rng.standard_normal(3), float(rng.standard_normal()))
        x = int(rng.integers(5))
        got = sc.glr_statistic(x, rep, rls)
        want, _ = glr_direct(rep.features[x], rls.theta, rls.Vinv.a)
        if not (math.isinf(got) and math.isinf(want)):
            worst_glr = max(worst_glr, abs(got - want))

    elapsed = time.monotonic() - t0
    ok = (worst_eig <= 1e-8 and worst_sm <= 1e-8 and worst_warm <= 1e-8
          and worst_ls <= 1e-6 and worst_glr <= 1e-10 and elapsed <= 30.0)
    _report(8, ok, f"max gaps: eig {worst_eig:.1e}, inverse {worst_sm:.1e}, "
                   f"batch {worst_warm:.1e}, ls {worst_ls:.1e}, glr "
                   f"{worst_glr:.1e}, {elapsed:.1f}s (limit 30s)")
    assert ok


def test_criterion_9_determinism(tmp_path):
    paths = {name: str(tmp_path / f"{name}.csv")
             for name in ("a", "b", "c", "d", "e")}
    base = RunConfig(benchmark="varying_dim", algo=AlgoConfig(kind="linucb"),
                     srl=sc.SrlConfig(), horizon=1500, n_runs=3, seed=17,
                     log_every=100, out_path=paths["a"])
    run_experiment(base)
    run_experiment(replace(base, out_path=paths["b"]))
    run_experiment(replace(base, out_path=paths["c"]), workers=3)
    bare = RunConfig(benchmark="mixing", algo=AlgoConfig(kind="leader"),
                     srl=None, horizon=800, n_runs=2, seed=4,
                     log_every=50, out_path=paths["d"])
    run_experiment(bare)
    run_experiment(replace(bare, out_path=paths["e"]), workers=2)

    blobs = {name: open(path, "rb").read()
             for name, path in paths.items()}
    repeat_ok = blobs["a"] == blobs["b"]
    parallel_ok = blobs["a"] == blobs["c"] and blobs["d"] == blobs["e"]
    ok = repeat_ok and parallel_ok
    _report(9, ok, f"repeat byte-identical={repeat_ok}, serial vs parallel "
                   f"byte-identical={parallel_ok}")
    assert ok
