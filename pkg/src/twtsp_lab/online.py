"""Online detour-following: the one-to-one algorithm and the many-to-one
orienteering variant, run against a release-time arrival stream.

The epsilon shift is an explicit argument so the harness can take exact
three-branch expectations instead of sampling. True requests are only ever
read through the stream, which hands a request out no earlier than its
release time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasiblePrecomputedWalk
from .graph import MetricGraph
from .model import CoverageReport, Idle, Instance, Move, Request, Walk, coverage, validate_walk
from .offline import OfflineConfig, DEFAULT_CONFIG, _orienteer


class OnlineStream:
    """Reveals each true request at its release time.

    `released(t)` returns the indices visible at time t; `request(i, t)`
    hands out a request only if it has been released by t. Every access is
    logged so tests can audit the online information constraint.
    """

    def __init__(self, requests):
        self.requests = tuple(requests)
        self.arrivals = tuple(sorted(range(len(self.requests)), key=lambda i: (self.requests[i].release, i)))
        self.access_log: list[tuple[int, int]] = []

    @staticmethod
    def from_instance(instance: Instance) -> "OnlineStream":
        return OnlineStream(instance.requests)

    def released(self, t: int) -> list[int]:
        out = []
        for i in self.arrivals:
            if self.requests[i].release > t:
                break
            out.append(i)
            self.access_log.append((t, i))
        return out

    def request(self, i: int, t: int) -> Request:
        r = self.requests[i]
        if r.release > t:
            raise AssertionError(f"request {i} read before its release ({t} < {r.release})")
        self.access_log.append((t, i))
        return r


@dataclass(frozen=True)
class OnlineRunResult:
    walk: Walk
    covered: CoverageReport
    epsilon: int
    detour_log: tuple[tuple[int, int | None, int], ...] = ()
    s_prime: int = 0


def reachable_set(
    current_pred: Request,
    t: int,
    revealed: dict[int, Request],
    s_prime: int,
    mode: str,
    graph: MetricGraph,
) -> set[int]:
    """True requests a detour from the predicted vertex at time t may serve.

    One-to-one mode additionally requires the out-and-back budget
    2*dist + 1 <= s_prime; in many-to-one mode the budget lives in the
    orienteering call and only the time condition applies.
    """
    out = set()
    for i, r in revealed.items():
        if r.release > t:
            continue
        d = graph.dist[current_pred.vertex][r.vertex]
        if t > r.deadline - d - 1:
            continue
        if mode == "one2one" and 2 * d + 1 > s_prime:
            continue
        out.add(i)
    return out


def _stops(pred_instance: Instance, walk: Walk, s_prime: int):
    cov = coverage(walk, pred_instance, service=s_prime)
    return sorted(((cov.service_starts[i], i) for i in cov.covered))


def _run(
    graph: MetricGraph,
    pred_instance: Instance,
    precomputed: Walk,
    stream: OnlineStream,
    epsilon: int,
    l_min: int,
    mode: str,
    config: OfflineConfig,
) -> OnlineRunResult:
    violations = validate_walk(precomputed, graph)
    if violations:
        raise InfeasiblePrecomputedWalk(violations)
    if epsilon not in (-1, 0, 1):
        raise ValueError(f"epsilon must be -1, 0 or 1, got {epsilon}")
    s_prime = pred_instance.service
    if s_prime < 1:
        raise ValueError("online runs need a predicted service time >= 1")
    k = l_min // 2
    stops = [(tp + epsilon * k, i) for tp, i in _stops(pred_instance, precomputed, s_prime)]
    stops = [(t, i) for t, i in stops if t >= 0]

    true_instance = Instance(graph, stream.requests, service=1)
    if not stops:
        trivial = Walk(precomputed.start_vertex, 0, ())
        return OnlineRunResult(trivial, coverage(trivial, true_instance), epsilon, (), s_prime)

    covered: set[int] = set()
    log: list[tuple[int, int | None, int]] = []
    actions: list = []
    start_vertex = pred_instance.requests[stops[0][1]].vertex
    start_time = stops[0][0]
    pos, t = start_vertex, start_time

    for n_stop, (t_i, i) in enumerate(stops):
        v_i = pred_instance.requests[i].vertex
        if v_i != pos:
            actions.append(Move(v_i))
            t += graph.dist[pos][v_i]
            pos = v_i
        if t > t_i:
            raise AssertionError("shifted schedule infeasible; precomputed walk lacks service slack")
        if t < t_i:
            actions.append(Idle(t_i - t))
            t = t_i
        # slack until the walk must leave for the next stop
        if n_stop + 1 < len(stops):
            t_next, i_next = stops[n_stop + 1]
            slack = t_next - t_i - graph.dist[v_i][pred_instance.requests[i_next].vertex]
        else:
            slack = None

        visible = {j: stream.request(j, t_i) for j in stream.released(t_i)}
        reach = reachable_set(pred_instance.requests[i], t_i, visible, s_prime, mode, graph)
        reach -= covered

        if mode == "one2one":
            best = None
            for j in sorted(reach):
                d = graph.dist[v_i][visible[j].vertex]
                length = 2 * d + 1
                if slack is not None and length > slack:
                    continue
                if best is None or visible[j].reward > visible[best].reward:
                    best = j
            if best is None:
                log.append((i, None, 0))
            else:
                d = graph.dist[v_i][visible[best].vertex]
                if d > 0:
                    actions.append(Move(visible[best].vertex))
                actions.append(Idle(1))
                if d > 0:
                    actions.append(Move(v_i))
                t += 2 * d + 1
                covered.add(best)
                log.append((i, best, 2 * d + 1))
        else:
            budget = s_prime if slack is None else min(s_prime, slack)
            targets = [(visible[j].vertex, visible[j].reward, 1) for j in sorted(reach)]
            idx_of = sorted(reach)
            res = _orienteer(graph, targets, v_i, budget, "cycle", config) if targets else None
            if res is None or res.value == 0:
                log.append((i, None, 0))
            else:
                cost = 0
                cpos = v_i
                for act in res.walk.actions:
                    actions.append(act)
                    if isinstance(act, Move):
                        cost += graph.dist[cpos][act.to]
                        cpos = act.to
                    else:
                        cost += act.duration
                t += cost
                for kk in res.visited:
                    covered.add(idx_of[kk])
                    log.append((i, idx_of[kk], cost))
                # the remaining S' - |cycle| block is idled out implicitly
                # while waiting for the next shifted stop

    walk = Walk(start_vertex, start_time, tuple(actions))
    cov = coverage(walk, true_instance, service=1)
    return OnlineRunResult(walk, cov, epsilon, tuple(log), s_prime)


def run_online(
    graph: MetricGraph,
    pred_instance: Instance,
    precomputed: Walk,
    stream: OnlineStream,
    epsilon: int,
    l_min: int,
    config: OfflineConfig = DEFAULT_CONFIG,
) -> OnlineRunResult:
    """Follow the precomputed walk shifted by epsilon*floor(l_min/2), taking
    a single highest-reward detour per covered predicted request."""
    return _run(graph, pred_instance, precomputed, stream, epsilon, l_min, "one2one", config)


def run_online_many(
    graph: MetricGraph,
    pred_instance: Instance,
    precomputed: Walk,
    stream: OnlineStream,
    epsilon: int,
    l_min: int,
    config: OfflineConfig = DEFAULT_CONFIG,
) -> OnlineRunResult:
    """Many-to-one variant: each detour is a rooted orienteering cycle of
    length at most S' over the uncovered reachable requests, then the rest
    of the service block is idled out."""
    return _run(graph, pred_instance, precomputed, stream, epsilon, l_min, "many2one", config)


def guess_set(l_min: int) -> list[int]:
    """{0} plus the powers of two up to l_min/4."""
    out = [0]
    p = 1
    while 4 * p <= l_min:
        out.append(p)
        p *= 2
    return out


def guess_lambda(runner, l_min: int, seed: int) -> OnlineRunResult:
    """Draw a location-error guess (powers of two up to l_min/4, or zero)
    and an epsilon uniformly, then delegate to `runner(s_prime, epsilon)`."""
    rng = np.random.Generator(np.random.Philox(seed))
    options = guess_set(l_min)
    guess = int(options[rng.integers(0, len(options))])
    epsilon = int(rng.integers(-1, 2))
    return runner(2 * guess + 1, epsilon)
