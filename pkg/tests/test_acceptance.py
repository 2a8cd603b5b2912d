"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Every numeric comparison that has zero tolerance uses integers or Fractions.
Each test prints one PASS line on success (run with -v to see the per-test
verdicts even when output capture is on).
"""

import math
from fractions import Fraction

import pytest

from twtsp_lab.generators import gen_lb, gen_many_to_one, gen_random, perturb_predictions
from twtsp_lab.harness import SimConfig, bench, simulate
from twtsp_lab.model import coverage, validate_walk
from twtsp_lab.offline import offline_solve
from twtsp_lab.online import OnlineStream, reachable_set, run_online, run_online_many
from twtsp_lab.oracle import opt_twtsp
from twtsp_lab.prediction_errors import profile

from oracles import enumerate_walks_opt

EPS = (-1, 0, 1)


def _pass(k, name, extra=""):
    print(f"ACCEPTANCE {k:>2} {name}: PASS {extra}".rstrip())


def conforming_pair(seed, lam, tau, n=5, m=None, spread=6):
    m = m or (1 + seed % 4)
    lo = max(4 * lam + 1, 2 * tau, 2) + 1
    inst = gen_random(
        {
            "n": n,
            "num_requests": min(m, n),
            "window_range": (lo, lo + spread),
            "distinct_vertices": True,
            "max_len": 2,
            "release_range": (0, 8),
        },
        seed,
    )
    pred, matching = perturb_predictions(inst, {"lambda": lam, "tau": tau}, seed + 1, conforming=True)
    return inst, pred, matching


def test_criterion_01_service_time_gap():
    # opt(G,I,S) >= opt(G,I,1) / (2S-1), exactly, on 200 random instances
    for seed in range(200):
        s = 2 + seed % 2
        inst = gen_random(
            {
                "n": 2 + seed % 5,
                "num_requests": 1 + seed % 5,
                "window_range": (s, s + 5),
                "release_range": (0, 8),
                "service": 1,
            },
            seed,
        )
        v1 = opt_twtsp(inst).value
        vs = opt_twtsp(inst.with_service(s)).value
        assert vs * (2 * s - 1) >= v1, f"seed {seed}: {vs} * {2 * s - 1} < {v1}"
    _pass(1, "service-time gap (200 instances, zero tolerance)")


def test_criterion_02_service_gap_tightness():
    for s, length in ((2, 4), (3, 6)):
        inst, _, _ = gen_lb("line-service", {"S": s, "L": length}, 0)
        assert opt_twtsp(inst.with_service(s)).value == 1
        assert opt_twtsp(inst.with_service(1)).value == 2 * s - 1
    _pass(2, "tight rooted line instances (opt(S)=1, opt(1)=2S-1)")


def test_criterion_03_zero_service_separation():
    for d, length in ((3, 2), (5, 3)):
        inst, _, _ = gen_lb("line0", {"D": d, "L": length}, 0)
        assert opt_twtsp(inst.with_service(1)).value == length
        assert opt_twtsp(inst.with_service(0)).value == d + 1
    _pass(3, "zero-service separation (opt(·,0)=D+1, opt(·,1)=L)")


def test_criterion_04_optima_relation():
    # opt(G,I',S') >= opt(G,I,S) / (3 rho) with S = 4L+1, S' = 2L+1
    for seed in range(100):
        lam = seed % 3
        inst, pred, matching = conforming_pair(seed, lam, tau=1, spread=5)
        prof = profile(inst, pred, matching)
        s = 4 * prof.lam + 1
        s_prime = 2 * prof.lam + 1
        opt_true = opt_twtsp(inst.with_service(s)).value
        opt_pred = opt_twtsp(pred.with_service(s_prime)).value
        assert Fraction(opt_pred) * 3 * prof.rho >= Fraction(opt_true), (
            f"seed {seed}: 3*{prof.rho}*{opt_pred} < {opt_true}"
        )
    _pass(4, "optima relation across predictions (100 instances, zero tolerance)")


def test_criterion_05_reachability_shift_cover():
    checked = 0
    for seed in range(40):
        lam, tau = seed % 3, (seed // 3) % 3
        inst, pred, matching = conforming_pair(seed + 1000, lam, tau)
        prof = profile(inst, pred, matching)
        s_prime = 2 * prof.lam + 1
        pred_s = pred.with_service(s_prime)
        walk = offline_solve(pred_s)
        cov = coverage(walk, pred_s)
        k = pred.l_min // 2
        true_of = dict((j, i) for i, j in matching.pairs)
        for j in cov.covered:
            i = true_of[j]
            hits = [
                eps
                for eps in EPS
                if cov.service_starts[j] + eps * k >= 0
                and i
                in reachable_set(
                    pred.requests[j],
                    cov.service_starts[j] + eps * k,
                    {i: inst.requests[i]},
                    s_prime,
                    "one2one",
                    inst.graph,
                )
            ]
            assert hits, f"seed {seed}, stop {j}: no epsilon reaches the matched request"
            checked += 1
    assert checked > 50
    _pass(5, f"shift cover over all three branches ({checked} matched stops)")


def test_criterion_06_online_guarantee():
    for seed in range(100):
        lam, tau = seed % 2, seed % 3
        inst, pred, matching = conforming_pair(seed + 5000, lam, tau)
        prof = profile(inst, pred, matching)
        s_prime = 2 * prof.lam + 1
        pred_s = pred.with_service(s_prime)
        walk = offline_solve(pred_s)
        rew_pred = coverage(walk, pred_s).reward
        total = 0
        for eps in EPS:
            res = run_online(inst.graph, pred_s, walk, OnlineStream.from_instance(inst), eps, pred.l_min)
            total += res.covered.reward
        assert Fraction(total, 3) * 6 * prof.rho >= Fraction(rew_pred), (
            f"seed {seed}: E={Fraction(total, 3)} < {rew_pred}/(6*{prof.rho})"
        )
    _pass(6, "online expected-reward bound (100 instances, zero tolerance)")


def test_criterion_07_offline_ratio():
    worst = 0.0
    for seed in range(100):
        inst = gen_random(
            {
                "n": 2 + seed % 4,
                "num_requests": 1 + seed % 5,
                "window_range": (2, 9),
                "release_range": (0, 10),
                "service": 1,
            },
            seed + 7000,
        )
        walk = offline_solve(inst)
        assert validate_walk(walk, inst.graph) == []
        got = coverage(walk, inst).reward
        opt = opt_twtsp(inst).value
        bound = 18 * max(1.0, math.log2(max(2, min(inst.graph.diameter, inst.l_max))))
        assert got * bound >= opt, f"seed {seed}: {got} * {bound} < {opt}"
        assert got <= opt
        if got:
            worst = max(worst, opt / got)
    _pass(7, f"offline approximation ratio (100 instances, worst measured {worst:.2f})")


def test_criterion_08_chain_construction_fidelity():
    for s, n_clusters in ((1, 4), (2, 3)):
        inst, pred, matching = gen_lb("chain", {"S": s, "K": 2, "C": 3, "N": n_clusters}, seed=12)
        assert opt_twtsp(inst).value == n_clusters
        prof = profile(inst, pred, matching)
        assert (prof.lam, prof.tau, prof.rho) == (s, 0, Fraction(1))
    # measured ratio of the prediction-following run on the construction; at
    # the desk default K=2 the windows (K*S) are below S'=2S+1 and the
    # offline walk covers nothing (ratio unbounded), so the report also runs
    # K=5 where the construction meets the window assumptions
    inst, pred, _ = gen_lb("chain", {"S": 1, "K": 2, "C": 3, "N": 4}, seed=12)
    rep_k2 = simulate(inst, pred, 1, seed=12)
    assert rep_k2.opt_value == 4
    r2 = "inf" if rep_k2.ratio is None else f"{float(rep_k2.ratio):.2f}"
    inst5, pred5, _ = gen_lb("chain", {"S": 1, "K": 5, "C": 3, "N": 4}, seed=12)
    rep_k5 = simulate(inst5, pred5, 1, seed=12)
    assert rep_k5.opt_value == 4
    assert rep_k5.ratio is not None and rep_k5.ratio >= 1
    r5 = f"{float(rep_k5.ratio):.2f}"
    _pass(8, f"chain construction fidelity (opt=N, profile=(S,0,1); measured ratios K=2:{r2}, K=5:{r5})")


def test_criterion_09_end_to_end(tmp_path):
    worst_zero_err = None
    for lam in (0, 1, 2):
        tau = 0 if lam == 0 else 1
        for t in range(8):
            seed = 9000 + 100 * lam + t
            inst, pred, matching = conforming_pair(seed, lam, tau)
            prof = profile(inst, pred, matching)
            s_prime = 2 * prof.lam + 1
            pred_s = pred.with_service(s_prime)
            walk = offline_solve(pred_s)
            assert validate_walk(walk, pred.graph) == []
            total = 0
            for eps in EPS:
                res = run_online(inst.graph, pred_s, walk, OnlineStream.from_instance(inst), eps, pred.l_min)
                assert validate_walk(res.walk, inst.graph) == []
                total += res.covered.reward
            expected = Fraction(total, 3)
            assert expected > 0, f"seed {seed}: conforming trial with zero expected reward"
            opt = opt_twtsp(inst).value
            ratio = Fraction(opt) / expected
            assert ratio >= 1
            if lam == 0:
                bound = 6 * 18 * max(1.0, math.log2(max(2, min(inst.graph.diameter, inst.l_max))))
                assert float(ratio) <= bound, f"seed {seed}: ratio {float(ratio)} > {bound}"
                worst_zero_err = max(worst_zero_err or 0.0, float(ratio))
    # the bench surface reproduces this suite deterministically
    suite = {
        "suites": [
            {
                "name": f"lam{lam}",
                "generator": {
                    "kind": "random",
                    "params": {
                        "n": 5,
                        "num_requests": 3,
                        "window_range": (4 * lam + 6, 4 * lam + 12),
                        "distinct_vertices": True,
                        "max_len": 2,
                    },
                },
                "perturb": {"lambda": lam, "tau": 0 if lam == 0 else 1, "conforming": True},
                "trials": 3,
                "base_seed": 9500,
                "lambda_policy": "profile",
            }
            for lam in (0, 1, 2)
        ]
    }
    out = bench(suite, tmp_path)
    assert all(r["ratio"] is not None for r in out["rows"])
    _pass(9, f"end-to-end bench (all ratios finite; worst perfect-prediction ratio {worst_zero_err:.2f})")


def test_criterion_10_many_to_one():
    for seed in range(50):
        inst, pred, matching = gen_many_to_one({"num_pred": 1 + seed % 2}, seed)
        prof = profile(inst, pred, matching)
        assert 2 * prof.lam <= min(inst.l_min, pred.l_min)
        s_prime = prof.lam
        pred_s = pred.with_service(s_prime)
        walk = offline_solve(pred_s)
        rew_pred = coverage(walk, pred_s).reward
        cov = coverage(walk, pred_s)
        k = pred.l_min // 2
        total = 0
        for eps in EPS:
            res = run_online_many(inst.graph, pred_s, walk, OnlineStream.from_instance(inst), eps, pred.l_min)
            assert validate_walk(res.walk, inst.graph) == []
            total += res.covered.reward
            # per-detour: collected reward beats the best single feasible request
            by_stop: dict[int, int] = {}
            for stop, chosen, _ in res.detour_log:
                if chosen is not None:
                    by_stop[stop] = by_stop.get(stop, 0) + inst.requests[chosen].reward
            stops = sorted((cov.service_starts[j] + eps * k, j) for j in cov.covered)
            stops = [(t, j) for t, j in stops if t >= 0]
            covered_replay: set[int] = set()
            for idx, (t, j) in enumerate(stops):
                if idx + 1 < len(stops):
                    nt, nj = stops[idx + 1]
                    slack = nt - t - inst.graph.dist[pred.requests[j].vertex][pred.requests[nj].vertex]
                else:
                    slack = s_prime
                budget = min(s_prime, slack)
                revealed = {i: r for i, r in enumerate(inst.requests) if r.release <= t}
                reach = reachable_set(pred.requests[j], t, revealed, s_prime, "many2one", inst.graph) - covered_replay
                best_single = 0
                for i in reach:
                    d = inst.graph.dist[pred.requests[j].vertex][inst.requests[i].vertex]
                    if 2 * d + 1 <= budget:
                        best_single = max(best_single, inst.requests[i].reward)
                assert by_stop.get(j, 0) >= best_single, f"seed {seed} eps {eps} stop {j}"
                for stop, chosen, _ in res.detour_log:
                    if stop == j and chosen is not None:
                        covered_replay.add(chosen)
        assert Fraction(total, 3) * 6 * prof.rho >= Fraction(rew_pred), f"seed {seed}"
    _pass(10, "many-to-one detours and end-to-end bound (50 instances)")


def test_criterion_11_oracle_self_consistency():
    for seed in range(50):
        inst = gen_random(
            {
                "n": 2 + seed % 2,
                "num_requests": 1 + seed % 3,
                "window_range": (2, 4),
                "release_range": (0, 3),
                "max_len": 2,
                "service": seed % 3,
            },
            seed + 11000,
        )
        if inst.horizon > 8:
            reqs = tuple(r for r in inst.requests if r.deadline <= 8)
            if not reqs:
                continue
            inst = inst.__class__(inst.graph, reqs, service=inst.service)
        assert opt_twtsp(inst).value == enumerate_walks_opt(inst), f"seed {seed}"
    _pass(11, "oracle equals naive walk enumeration (50 micro instances)")
