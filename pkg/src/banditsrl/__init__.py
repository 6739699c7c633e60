"""Contextual linear bandits with learned representation selection."""

from banditsrl.bandit_env import (
    BENCHMARKS, BanditInstance, GenerationError, Representation,
    SpectralReport, ValidationError, analyze_representation, build_benchmark)
from banditsrl.base_algos import ALGO_KINDS, AlgoConfig, AlgoError
from banditsrl.harness import (
    ExperimentResult, HarnessError, RegimeStats, RunConfig, StepRecord,
    fit_regime, instance_info, read_csv, run_experiment, write_csv)
from banditsrl.linalg import LinAlgError, RlsState, SymMatrix
from banditsrl.srl_core import (
    LOSS_KINDS, SrlConfig, SrlError, SrlState, compute_active_set,
    feed_reward, glr_statistic, loss_bic, loss_eig, loss_weak,
    select_representation, srl_phase_boundary, srl_step)

__version__ = "0.1.0"

__all__ = [
    "ALGO_KINDS",
    "AlgoConfig",
    "AlgoError",
    "BENCHMARKS",
    "BanditInstance",
    "ExperimentResult",
    "GenerationError",
    "HarnessError",
    "LOSS_KINDS",
    "LinAlgError",
    "RegimeStats",
    "Representation",
    "RlsState",
    "RunConfig",
    "SpectralReport",
    "SrlConfig",
    "SrlError",
    "SrlState",
    "StepRecord",
    "SymMatrix",
    "ValidationError",
    "analyze_representation",
    "build_benchmark",
    "compute_active_set",
    "feed_reward",
    "fit_regime",
    "glr_statistic",
    "instance_info",
    "loss_bic",
    "loss_eig",
    "loss_weak",
    "read_csv",
    "run_experiment",
    "select_representation",
    "srl_phase_boundary",
    "srl_step",
    "write_csv",
    "__version__",
]
