"""Prediction-error model: per-pair errors, matching-level profiles, best matching.

The reward error is kept as an exact Fraction so inequality tests like
Rew >= Rew'/(6*rho) never touch floating point. The online solvers never
see a Matching; they receive only a bound on the location error.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .exceptions import IndexOutOfRange, KindMismatch, SizeMismatch
from .graph import MetricGraph
from .model import Instance, Request
from .oracle import orienteering_exact


class MatchKind(str, Enum):
    ONE_TO_ONE = "one_to_one"
    PARTIAL = "partial"
    MANY_TO_ONE = "many_to_one"


@dataclass(frozen=True)
class Matching:
    """Pairing between true and predicted request indices.

    pairs are (true index, predicted index). For PARTIAL matchings the
    unmatched index sets are stored explicitly; for the other kinds they are
    empty.
    """

    kind: MatchKind
    pairs: tuple[tuple[int, int], ...]
    unmatched_true: frozenset[int] = frozenset()
    unmatched_pred: frozenset[int] = frozenset()

    @staticmethod
    def one_to_one(pairs) -> "Matching":
        return Matching(MatchKind.ONE_TO_ONE, tuple(sorted(tuple(p) for p in pairs)))

    @staticmethod
    def identity(n: int) -> "Matching":
        return Matching.one_to_one((i, i) for i in range(n))

    @staticmethod
    def partial(pairs, n_true: int, n_pred: int) -> "Matching":
        pairs = tuple(sorted(tuple(p) for p in pairs))
        mt = {i for i, _ in pairs}
        mp = {j for _, j in pairs}
        return Matching(
            MatchKind.PARTIAL,
            pairs,
            unmatched_true=frozenset(range(n_true)) - mt,
            unmatched_pred=frozenset(range(n_pred)) - mp,
        )

    @staticmethod
    def many_to_one(pairs) -> "Matching":
        return Matching(MatchKind.MANY_TO_ONE, tuple(sorted(tuple(p) for p in pairs)))


@dataclass(frozen=True)
class ErrorProfile:
    lam: int
    tau: int
    rho: Fraction
    delta1: int = 0
    delta2: int = 0


def pair_errors(sigma: Request, sigma_pred: Request, graph: MetricGraph) -> tuple[int, int, Fraction]:
    """(location, time-window, reward) error of a single true/predicted pair."""
    loc = graph.dist[sigma.vertex][sigma_pred.vertex]
    tw = max(abs(sigma.release - sigma_pred.release), abs(sigma.deadline - sigma_pred.deadline))
    rew = max(Fraction(sigma.reward, sigma_pred.reward), Fraction(sigma_pred.reward, sigma.reward))
    return loc, tw, rew


def _check_indices(m: Matching, n_true: int, n_pred: int):
    for i, j in m.pairs:
        if not (0 <= i < n_true):
            raise IndexOutOfRange(f"true index {i} out of range 0..{n_true - 1}")
        if not (0 <= j < n_pred):
            raise IndexOutOfRange(f"predicted index {j} out of range 0..{n_pred - 1}")


def profile(instance_true: Instance, instance_pred: Instance, m: Matching) -> ErrorProfile:
    """Matching-level error profile (Lambda, tau, rho, Delta1, Delta2).

    One-to-one / partial: maxima of pair errors over matched pairs; the
    deltas total the unmatched true / predicted rewards. Many-to-one: the
    location error of a predicted request is the length of the cheapest
    cycle from its vertex that visits every preimage with one idle unit
    each (found by binary search over the exact cycle-orienteering budget),
    and its reward error compares the predicted reward against the summed
    preimage rewards.
    """
    g = instance_true.graph
    reqs_t = instance_true.requests
    reqs_p = instance_pred.requests
    _check_indices(m, len(reqs_t), len(reqs_p))

    if m.kind in (MatchKind.ONE_TO_ONE, MatchKind.PARTIAL):
        if m.kind == MatchKind.ONE_TO_ONE:
            if len(reqs_t) != len(reqs_p):
                raise KindMismatch("one-to-one matching needs |I| == |I'|")
            ts = [i for i, _ in m.pairs]
            ps = [j for _, j in m.pairs]
            if sorted(ts) != list(range(len(reqs_t))) or sorted(ps) != list(range(len(reqs_p))):
                raise KindMismatch("one-to-one matching must be a perfect bijection")
        else:
            if len({i for i, _ in m.pairs}) != len(m.pairs) or len({j for _, j in m.pairs}) != len(m.pairs):
                raise KindMismatch("partial matching pairs must use each index at most once")
        lam = 0
        tau = 0
        rho = Fraction(1)
        for i, j in m.pairs:
            loc, tw, rew = pair_errors(reqs_t[i], reqs_p[j], g)
            lam = max(lam, loc)
            tau = max(tau, tw)
            rho = max(rho, rew)
        d1 = sum(reqs_t[i].reward for i in m.unmatched_true)
        d2 = sum(reqs_p[j].reward for j in m.unmatched_pred)
        return ErrorProfile(lam, tau, rho, d1, d2)

    if m.kind == MatchKind.MANY_TO_ONE:
        seen = [i for i, _ in m.pairs]
        if sorted(seen) != list(range(len(reqs_t))):
            raise KindMismatch("many-to-one matching must map every true index exactly once")
        groups: dict[int, list[int]] = {}
        for i, j in m.pairs:
            groups.setdefault(j, []).append(i)
        lam = 0
        tau = 0
        rho = Fraction(1)
        for j, pre in groups.items():
            pj = reqs_p[j]
            lam = max(lam, _group_cycle_length(g, pj.vertex, [reqs_t[i] for i in pre]))
            total = sum(reqs_t[i].reward for i in pre)
            rho = max(rho, Fraction(pj.reward, total), Fraction(total, pj.reward))
            for i in pre:
                tau = max(tau, pair_errors(reqs_t[i], pj, g)[1])
        return ErrorProfile(lam, tau, rho, 0, 0)

    raise KindMismatch(f"unknown matching kind {m.kind!r}")


def _group_cycle_length(g: MetricGraph, root_vertex: int, preimages: list[Request]) -> int:
    """Smallest cycle budget from root_vertex collecting all preimages
    with one idle unit each."""
    targets = [(r.vertex, 1, 1) for r in preimages]
    want = len(targets)
    hi = sum(2 * g.dist[root_vertex][v] + 1 for v, _, _ in targets)
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if orienteering_exact(g, targets, root_vertex, mid, mode="cycle").value >= want:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _has_perfect_matching(allowed: list[list[int]], n: int) -> bool:
    match_r = [-1] * n

    def try_kuhn(u, seen):
        for v in allowed[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_r[v] == -1 or try_kuhn(match_r[v], seen):
                match_r[v] = u
                return True
        return False

    for u in range(n):
        if not try_kuhn(u, [False] * n):
            return False
    return True


def best_matching(instance_true: Instance, instance_pred: Instance, objective: str = "lambda") -> Matching:
    """Perfect matching minimizing the bottleneck location error.

    Binary search over candidate thresholds with a bipartite feasibility
    test, then the lexicographically smallest pair list among optimal
    matchings. Only the bottleneck-location objective is supported.
    """
    if objective != "lambda":
        raise ValueError(f"unsupported objective {objective!r}")
    n = len(instance_true.requests)
    if n != len(instance_pred.requests):
        raise SizeMismatch(f"|I|={n} != |I'|={len(instance_pred.requests)}")
    if n == 0:
        return Matching.one_to_one(())
    g = instance_true.graph
    cost = [
        [g.dist[t.vertex][p.vertex] for p in instance_pred.requests]
        for t in instance_true.requests
    ]
    thresholds = sorted({c for row in cost for c in row})

    def feasible(th, fixed=()):
        used_t = {i for i, _ in fixed}
        used_p = {j for _, j in fixed}
        if any(cost[i][j] > th for i, j in fixed):
            return False
        rem_t = [i for i in range(n) if i not in used_t]
        rem_p = [j for j in range(n) if j not in used_p]
        pos = {j: k for k, j in enumerate(rem_p)}
        allowed = [[pos[j] for j in rem_p if cost[i][j] <= th] for i in rem_t]
        return _has_perfect_matching(allowed, len(rem_t))

    lo, hi = 0, len(thresholds) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(thresholds[mid]):
            hi = mid
        else:
            lo = mid + 1
    th = thresholds[lo]

    fixed: list[tuple[int, int]] = []
    used_p: set[int] = set()
    for i in range(n):
        for j in range(n):
            if j in used_p or cost[i][j] > th:
                continue
            if feasible(th, fixed + [(i, j)]):
                fixed.append((i, j))
                used_p.add(j)
                break
    return Matching.one_to_one(fixed)


def matching_to_json(m: Matching) -> dict:
    return {"kind": m.kind.value, "pairs": [list(p) for p in m.pairs]}


def matching_from_json(obj: dict, n_true: int | None = None, n_pred: int | None = None) -> Matching:
    kind = MatchKind(obj["kind"])
    pairs = [tuple(p) for p in obj["pairs"]]
    if kind == MatchKind.ONE_TO_ONE:
        return Matching.one_to_one(pairs)
    if kind == MatchKind.MANY_TO_ONE:
        return Matching.many_to_one(pairs)
    if n_true is None or n_pred is None:
        raise KindMismatch("partial matching JSON needs the sequence sizes")
    return Matching.partial(pairs, n_true, n_pred)
