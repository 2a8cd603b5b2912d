"""Experiment driver: generators -> offline solve -> online runs -> oracle,
with exact three-branch expectations and reproducible reports.

Expectations over the epsilon shift are exact rationals (three branches);
Monte Carlo enters only through generator seeds and location-error guesses.
Every report embeds its inputs' digest and configuration.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exceptions import BadSuiteFile, StateBudgetExceeded
from .generators import gen_lb, gen_random, perturb_predictions
from .model import Instance, Walk, coverage, instance_to_json, walk_to_json
from .offline import DEFAULT_CONFIG, OfflineConfig, offline_solve
from .online import OnlineStream, guess_set, run_online, run_online_many
from .oracle import DEFAULT_STATE_BUDGET, opt_twtsp
from .prediction_errors import ErrorProfile, best_matching, profile

EPSILONS = (-1, 0, 1)


@dataclass(frozen=True)
class SimConfig:
    offline: OfflineConfig = DEFAULT_CONFIG
    state_budget: int = DEFAULT_STATE_BUDGET
    use_oracle: bool = True


@dataclass(frozen=True)
class SimulationReport:
    instance_digest: str
    opt_value: int | None
    opt_budget_exceeded: bool
    offline_value: int
    per_epsilon_rewards: dict[int, int]
    expected_reward: Fraction
    ratio: Fraction | None
    error_profile: ErrorProfile | None
    lambda_bound: int | str
    s_prime: int
    mode: str
    seed: int
    offline_walk: Walk | None = None
    config_echo: dict = field(default_factory=dict)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _digest(instance: Instance, pred: Instance) -> str:
    payload = canonical_json({"instance": instance_to_json(instance), "predictions": instance_to_json(pred)})
    return hashlib.sha256(payload.encode()).hexdigest()


def _frac_json(f: Fraction | None):
    if f is None:
        return None
    return {"num": f.numerator, "den": f.denominator}


def report_to_json(rep: SimulationReport) -> dict:
    prof = rep.error_profile
    return {
        "instance_digest": rep.instance_digest,
        "opt_value": rep.opt_value,
        "opt_budget_exceeded": rep.opt_budget_exceeded,
        "offline_value": rep.offline_value,
        "per_epsilon_rewards": {str(k): v for k, v in sorted(rep.per_epsilon_rewards.items())},
        "expected_reward": _frac_json(rep.expected_reward),
        "ratio": _frac_json(rep.ratio),
        "error_profile": None
        if prof is None
        else {
            "lambda": prof.lam,
            "tau": prof.tau,
            "rho": _frac_json(prof.rho),
            "delta1": prof.delta1,
            "delta2": prof.delta2,
        },
        "lambda_bound": rep.lambda_bound,
        "s_prime": rep.s_prime,
        "mode": rep.mode,
        "seed": rep.seed,
        "offline_walk": None if rep.offline_walk is None else walk_to_json(rep.offline_walk),
        "config": rep.config_echo,
    }


def simulate(
    instance: Instance,
    pred_instance: Instance,
    lambda_bound,
    mode: str = "one2one",
    seed: int = 0,
    config: SimConfig = SimConfig(),
) -> SimulationReport:
    """One full trial: offline walk on the predictions at the service time
    derived from the location-error bound, the three epsilon branches
    against the online stream, and the oracle optimum when within budget.

    `lambda_bound` may be an int (an upper bound on the location error is
    legal) or "guess", which draws from {0} + powers of two up to l_min/4.
    """
    if mode not in ("one2one", "many2one"):
        raise ValueError(f"unknown mode {mode!r}")
    l_min = pred_instance.l_min
    bound = lambda_bound
    if lambda_bound == "guess":
        rng = np.random.Generator(np.random.Philox(int(seed)))
        options = guess_set(l_min)
        bound = int(options[rng.integers(0, len(options))])
    bound = int(bound)
    if bound < 0:
        raise ValueError("lambda bound must be >= 0")
    s_prime = 2 * bound + 1 if mode == "one2one" else max(bound, 1)

    pred_s = pred_instance.with_service(s_prime)
    walk_pred = offline_solve(pred_s, config.offline)
    offline_value = coverage(walk_pred, pred_s).reward

    runner = run_online if mode == "one2one" else run_online_many
    rewards: dict[int, int] = {}
    for eps in EPSILONS:
        stream = OnlineStream.from_instance(instance)
        res = runner(instance.graph, pred_s, walk_pred, stream, eps, l_min, config.offline)
        rewards[eps] = res.covered.reward
    expected = Fraction(sum(rewards.values()), len(EPSILONS))

    opt_value = None
    budget_exceeded = False
    if config.use_oracle:
        try:
            opt_value = opt_twtsp(instance.with_service(1), config.state_budget).value
        except StateBudgetExceeded:
            budget_exceeded = True

    ratio = None
    if opt_value is not None and expected > 0:
        ratio = Fraction(opt_value) / expected

    err = None
    if len(instance.requests) == len(pred_instance.requests):
        err = profile(instance, pred_instance, best_matching(instance, pred_instance))

    return SimulationReport(
        instance_digest=_digest(instance, pred_instance),
        opt_value=opt_value,
        opt_budget_exceeded=budget_exceeded,
        offline_value=offline_value,
        per_epsilon_rewards=rewards,
        expected_reward=expected,
        ratio=ratio,
        error_profile=err,
        lambda_bound=lambda_bound if lambda_bound == "guess" else bound,
        s_prime=s_prime,
        mode=mode,
        seed=seed,
        offline_walk=walk_pred,
        config_echo={"state_budget": config.state_budget, "exact_orienteering": config.offline.exact_orienteering},
    )


def _materialize(block: dict, seed: int):
    gen = block.get("generator", {})
    kind = gen.get("kind")
    params = gen.get("params", {})
    if kind == "random":
        instance = gen_random(params, seed)
        perturb = block.get("perturb")
        if perturb:
            pred, matching = perturb_predictions(
                instance,
                perturb,
                seed + 1,
                conforming=bool(perturb.get("conforming", False)),
            )
        else:
            pred, matching = instance, None
        return instance, pred, matching
    if kind in ("chain", "chain0", "uniform", "line-service", "line0"):
        instance, pred, matching = gen_lb(kind, params, seed)
        if pred is None:
            pred = instance
        return instance, pred, matching
    raise BadSuiteFile(f"unknown generator kind {kind!r}")


def _bench_trial(block: dict, seed: int, state_budget: int) -> dict:
    instance, pred, _ = _materialize(block, seed)
    policy = block.get("lambda_policy", "profile")
    err = None
    if len(instance.requests) == len(pred.requests):
        err = profile(instance, pred, best_matching(instance, pred))
    if policy == "profile":
        if err is None:
            raise BadSuiteFile("lambda_policy 'profile' needs equal-size predictions")
        bound = err.lam
    elif policy == "guess":
        bound = "guess"
    elif isinstance(policy, int):
        bound = policy
    else:
        raise BadSuiteFile(f"unknown lambda_policy {policy!r}")
    config = SimConfig(state_budget=state_budget)
    rep = simulate(instance, pred, bound, mode=block.get("mode", "one2one"), seed=seed, config=config)
    g = instance.graph
    logmin = max(1.0, math.log2(max(2, min(g.diameter, max(instance.l_max, 1)))))
    return {
        "suite": block.get("name", "suite"),
        "seed": seed,
        "lambda": None if err is None else err.lam,
        "tau": None if err is None else err.tau,
        "rho": None if err is None else f"{err.rho.numerator}/{err.rho.denominator}",
        "opt": rep.opt_value if not rep.opt_budget_exceeded else "budget_exceeded",
        "offline": rep.offline_value,
        "expected": f"{rep.expected_reward.numerator}/{rep.expected_reward.denominator}",
        "ratio": None if rep.ratio is None else f"{rep.ratio.numerator}/{rep.ratio.denominator}",
        "logmin": round(logmin, 6),
        "_ratio_frac": None if rep.ratio is None else (rep.ratio.numerator, rep.ratio.denominator),
    }


def bench(suite: dict, out_dir, state_budget: int = DEFAULT_STATE_BUDGET, workers: int = 1) -> dict:
    """Run a suite file: one row per (block, seed) plus per-block aggregates.

    Writes bench.csv and gnuplot-ready ratio_vs_lambda.dat and
    ratio_vs_logmin.dat into out_dir; reruns are byte-identical.
    """
    if not isinstance(suite, dict) or "suites" not in suite:
        raise BadSuiteFile("suite file must be an object with a 'suites' list")
    jobs = []
    for block in suite["suites"]:
        if "generator" not in block:
            raise BadSuiteFile(f"suite block {block.get('name')!r} lacks a generator")
        trials = int(block.get("trials", 1))
        base = int(block.get("base_seed", 0))
        for t in range(trials):
            jobs.append((block, base + t))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_worker, [(b, s, state_budget) for b, s in jobs]))
    else:
        rows = [_bench_trial(b, s, state_budget) for b, s in jobs]
    rows.sort(key=lambda r: (r["suite"], r["seed"]))

    aggregates = []
    for name in sorted({r["suite"] for r in rows}):
        fracs = [Fraction(*r["_ratio_frac"]) for r in rows if r["suite"] == name and r["_ratio_frac"]]
        if fracs:
            fracs.sort()
            mid = len(fracs) // 2
            median = fracs[mid] if len(fracs) % 2 else (fracs[mid - 1] + fracs[mid]) / 2
            aggregates.append(
                {
                    "suite": name,
                    "max_ratio": f"{max(fracs).numerator}/{max(fracs).denominator}",
                    "median_ratio": f"{median.numerator}/{median.denominator}",
                    "trials": len([r for r in rows if r["suite"] == name]),
                }
            )
        else:
            aggregates.append({"suite": name, "max_ratio": None, "median_ratio": None, "trials": 0})

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = ["suite", "seed", "lambda", "tau", "rho", "opt", "offline", "expected", "ratio", "logmin"]
    with open(out / "bench.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([r[c] for c in cols])
        w.writerow([])
        w.writerow(["suite", "max_ratio", "median_ratio", "trials"])
        for a in aggregates:
            w.writerow([a["suite"], a["max_ratio"], a["median_ratio"], a["trials"]])
    with open(out / "ratio_vs_lambda.dat", "w") as fh:
        fh.write("# lambda ratio\n")
        for r in rows:
            if r["_ratio_frac"] and r["lambda"] is not None:
                fh.write(f"{r['lambda']} {float(Fraction(*r['_ratio_frac'])):.6f}\n")
    with open(out / "ratio_vs_logmin.dat", "w") as fh:
        fh.write("# log2_min_D_Lmax ratio\n")
        for r in rows:
            if r["_ratio_frac"]:
                fh.write(f"{r['logmin']} {float(Fraction(*r['_ratio_frac'])):.6f}\n")
    for r in rows:
        r.pop("_ratio_frac", None)
    return {"rows": rows, "aggregates": aggregates}


def _bench_worker(args):
    block, seed, budget = args
    return _bench_trial(block, seed, budget)
