"""Command-line front end.

Subcommands: ``run`` executes a configured experiment and prints the
regime statistics as JSON; ``gen`` writes a benchmark instance file;
``analyze`` prints one spectral report per representation of an
instance; ``stats`` recomputes regime statistics from a results CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from banditsrl.base_algos import ALGO_KINDS, AlgoError
from banditsrl.bandit_env import (
    BENCHMARKS, BanditInstance, GenerationError, ValidationError,
    analyze_representation, build_benchmark)
from banditsrl.harness import (
    HarnessError, RunConfig, fit_regime, instance_info, read_csv,
    run_experiment)
from banditsrl.linalg import LinAlgError
from banditsrl.srl_core import LOSS_KINDS, SrlError

_ERRORS = (HarnessError, ValidationError, GenerationError, AlgoError,
           SrlError, LinAlgError, OSError, json.JSONDecodeError)


def _jsonable(value):
    """JSON-safe copy: non-finite floats become strings, inf-aware."""
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="banditsrl",
        description="Contextual linear bandit experiments with phased "
                    "representation selection.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment config")
    run_p.add_argument("--config", help="JSON file with run config fields")
    run_p.add_argument("--benchmark", choices=BENCHMARKS)
    run_p.add_argument("--algo", choices=ALGO_KINDS,
                       help="base algorithm kind override")
    run_p.add_argument("--srl-loss", choices=LOSS_KINDS,
                       help="selection loss override")
    run_p.add_argument("--disable-srl", action="store_true",
                       help="run the base algorithm bare")
    run_p.add_argument("--horizon", type=int)
    run_p.add_argument("--n-runs", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--log-every", type=int)
    run_p.add_argument("--out", help="results CSV path")
    run_p.add_argument("--workers", type=int, default=1,
                       help="concurrent run workers (default 1)")

    gen_p = sub.add_parser("gen", help="write a benchmark instance JSON")
    gen_p.add_argument("--benchmark", required=True, choices=BENCHMARKS)
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--sigma", type=float, default=0.3)
    gen_p.add_argument("--out", required=True)

    an_p = sub.add_parser("analyze",
                          help="spectral report for each map of an instance")
    an_p.add_argument("--instance", required=True)

    st_p = sub.add_parser("stats",
                          help="recompute regime stats from a results CSV")
    st_p.add_argument("--in", dest="in_path", required=True)
    st_p.add_argument("--instance",
                      help="instance JSON for ground-truth-dependent fields")
    return parser


def _cmd_run(args):
    payload = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if not isinstance(payload, dict):
            raise HarnessError("config file must hold a JSON object")
    if args.benchmark:
        payload["benchmark"] = args.benchmark
    if args.algo:
        algo = payload.get("algo", {})
        if not isinstance(algo, dict):
            raise HarnessError("config algo must be an object")
        algo["kind"] = args.algo
        payload["algo"] = algo
    if args.disable_srl:
        payload["srl"] = "disabled"
    if args.srl_loss:
        srl = payload.get("srl", {})
        if srl == "disabled":
            raise HarnessError("cannot set a selection loss with srl disabled")
        if not isinstance(srl, dict):
            raise HarnessError("config srl must be an object")
        srl["loss"] = args.srl_loss
        payload["srl"] = srl
    for flag, key in (("horizon", "horizon"), ("n_runs", "n_runs"),
                      ("seed", "seed"), ("log_every", "log_every"),
                      ("out", "out_path")):
        value = getattr(args, flag)
        if value is not None:
            payload[key] = value
    cfg = RunConfig.from_dict(payload)
    result = run_experiment(cfg, workers=max(1, args.workers))
    print(json.dumps(_jsonable(result.stats.to_dict())))
    return 0


def _cmd_gen(args):
    inst = build_benchmark(args.benchmark, seed=args.seed, sigma=args.sigma)
    inst.save(args.out)
    print(json.dumps({"benchmark": args.benchmark, "out": args.out,
                      "n_reps": len(inst.reps),
                      "min_gap": inst.min_gap}))
    return 0


def _cmd_analyze(args):
    inst = BanditInstance.load(args.instance)
    for rep in inst.reps:
        report = analyze_representation(inst, rep)
        print(json.dumps(_jsonable(report.to_dict())))
    return 0


def _cmd_stats(args):
    records = read_csv(args.in_path)
    info = None
    if args.instance:
        info = instance_info(BanditInstance.load(args.instance))
    stats = fit_regime(records, info=info)
    print(json.dumps(_jsonable(stats.to_dict())))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "gen": _cmd_gen,
               "analyze": _cmd_analyze, "stats": _cmd_stats}[args.command]
    try:
        return handler(args)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
