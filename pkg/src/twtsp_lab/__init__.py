"""Time-windows TSP with predictions: solvers, error model, generators, harness."""

from .graph import MetricGraph, build_metric
from .model import (
    CoverageReport,
    Idle,
    Instance,
    Move,
    Request,
    Walk,
    coverage,
    validate_walk,
)
from .oracle import Job, OracleResult, job_scheduling, opt_twtsp, orienteering_exact
from .prediction_errors import ErrorProfile, Matching, best_matching, pair_errors, profile
from .offline import OfflineConfig, aligned_phase, augment_service, large_service_solve, offline_solve, thin_walk
from .online import OnlineRunResult, OnlineStream, guess_lambda, reachable_set, run_online, run_online_many
from .generators import (
    adversary_two_vertex,
    derandomize_rewards,
    gen_lb,
    gen_many_to_one,
    gen_random,
    perturb_predictions,
)
from .harness import SimConfig, SimulationReport, bench, simulate

__version__ = "0.1.0"

__all__ = [
    "MetricGraph",
    "build_metric",
    "Request",
    "Instance",
    "Walk",
    "Move",
    "Idle",
    "CoverageReport",
    "coverage",
    "validate_walk",
    "Matching",
    "ErrorProfile",
    "pair_errors",
    "profile",
    "best_matching",
    "OracleResult",
    "Job",
    "opt_twtsp",
    "orienteering_exact",
    "job_scheduling",
    "OfflineConfig",
    "thin_walk",
    "aligned_phase",
    "augment_service",
    "large_service_solve",
    "offline_solve",
    "OnlineStream",
    "OnlineRunResult",
    "reachable_set",
    "run_online",
    "run_online_many",
    "guess_lambda",
    "gen_random",
    "perturb_predictions",
    "gen_lb",
    "gen_many_to_one",
    "derandomize_rewards",
    "adversary_two_vertex",
    "SimConfig",
    "SimulationReport",
    "simulate",
    "bench",
]
