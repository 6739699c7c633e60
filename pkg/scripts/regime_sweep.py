"""Run the benchmark grid and print one regime summary per cell.

Each cell is a (benchmark, algorithm, loss) triple at a shared horizon
and run count.  CSVs land in the output directory under
<benchmark>__<algo>__<loss>.csv so they can be re-summarized later with
`banditsrl stats`.
"""

import argparse
import os
import time

from banditsrl import RunConfig, run_experiment
from banditsrl.base_algos import AlgoConfig
from banditsrl.srl_core import SrlConfig

# (benchmark, algo kind, loss or None for a bare/leader run)
CELLS = (
    ("single_rep_hls", "linucb", "eig"),
    ("varying_dim", "linucb", "eig"),
    ("varying_dim", "eps_greedy", "eig"),
    ("varying_dim_no_hls", "eps_greedy", "eig"),
    ("varying_dim_no_hls", "linucb", "eig"),
    ("weak_hls", "linucb", "weak"),
    ("weak_hls", "linucb", "eig"),
    ("mixing", "linucb", "eig"),
    ("mixing", "leader", None),
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="sweep_out")
    ap.add_argument("--horizon", type=int, default=30000)
    ap.add_argument("--n-runs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true",
                    help="2000 steps, 2 runs; smoke-test the grid")
    args = ap.parse_args()

    horizon = 2000 if args.quick else args.horizon
    n_runs = 2 if args.quick else args.n_runs
    os.makedirs(args.out_dir, exist_ok=True)

    for benchmark, kind, loss in CELLS:
        tag = f"{benchmark}__{kind}__{loss or 'off'}"
        out = os.path.join(args.out_dir, f"{tag}.csv")
        cfg = RunConfig(
            benchmark=benchmark,
            algo=AlgoConfig(kind=kind),
            srl=SrlConfig(loss=loss) if loss else None,
            horizon=horizon, n_runs=n_runs, seed=args.seed,
            log_every=100, out_path=out)
        t0 = time.monotonic()
        res = run_experiment(cfg, workers=args.workers)
        st = res.stats
        print(f"[{tag}] final={st.final_regret_mean:.1f}"
              f"+-{st.final_regret_std:.1f}"
              f" slope={st.loglog_slope_mean:.3f}"
              f" tail={st.tail_growth_mean:.2f}"
              f" glrt_tail={st.glrt_tail_rate_mean:.3f}"
              f" ({time.monotonic() - t0:.1f}s) -> {out}")


if __name__ == "__main__":
    main()
