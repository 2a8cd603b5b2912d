"""Offline approximation pipeline for TW-TSP with service times.

Components: the 2S-1 thinning transform, the aligned-phase constant-factor
algorithm for large windows, the service-time graph augmentation, the
job-scheduling reduction for large service times, and the dispatcher that
stitches them together (plus cheap polynomial baselines; the best candidate
by recomputed coverage wins).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .exceptions import ServiceExceedsDiameter, ServiceExceedsWindow, WindowTooSmall
from .graph import build_metric
from .model import (
    Idle,
    Instance,
    Move,
    Request,
    Walk,
    coverage,
    presence_blocks,
)
from .oracle import greedy_orienteering, orienteering_exact


@dataclass(frozen=True)
class OfflineConfig:
    exact_orienteering: bool = True
    orienteering_cap: int = 15  # above this many targets the greedy surrogate runs


DEFAULT_CONFIG = OfflineConfig()


def _orienteer(graph, targets, root, budget, mode, config: OfflineConfig):
    if config.exact_orienteering and len(targets) <= config.orienteering_cap:
        return orienteering_exact(graph, targets, root, budget, mode)
    return greedy_orienteering(graph, targets, root, budget, mode)


def _trivial_walk(instance: Instance) -> Walk:
    v = instance.root if instance.root is not None else 0
    return Walk(v, 0, ())


def rebuild_schedule_walk(instance: Instance, services, service_len: int) -> Walk:
    """Walk serving the given (request index, start time) pairs in order.

    Travels directly between consecutive service vertices and idles through
    each service. When the instance is rooted the walk starts at the root at
    time 0; leading services unreachable from the root are dropped.
    """
    todo = sorted(services, key=lambda s: (s[1], s[0]))
    g = instance.graph
    if instance.root is not None:
        while todo and g.dist[instance.root][instance.requests[todo[0][0]].vertex] > todo[0][1]:
            todo.pop(0)
    if not todo:
        return _trivial_walk(instance)

    first_v = instance.requests[todo[0][0]].vertex
    actions: list = []
    if instance.root is not None:
        start_vertex, t = instance.root, 0
        if first_v != start_vertex:
            actions.append(Move(first_v))
            t += g.dist[start_vertex][first_v]
        pos = first_v
    else:
        start_vertex, t, pos = first_v, todo[0][1], first_v

    for idx, tau in todo:
        v = instance.requests[idx].vertex
        if v != pos:
            actions.append(Move(v))
            t += g.dist[pos][v]
            pos = v
        depart = tau + service_len
        if depart < t:
            raise AssertionError(f"schedule not feasible: service {idx} at {tau} reached at {t}")
        if depart > t:
            actions.append(Idle(depart - t))
            t = depart
    start_time = 0 if instance.root is not None else todo[0][1]
    return Walk(start_vertex, start_time, tuple(_merge_idles(actions)))


def _merge_idles(actions):
    out: list = []
    for act in actions:
        if isinstance(act, Idle) and out and isinstance(out[-1], Idle):
            out[-1] = Idle(out[-1].duration + act.duration)
        elif isinstance(act, Idle) and act.duration == 0:
            continue
        else:
            out.append(act)
    return out


def thin_walk(walk: Walk, instance: Instance, target_s: int) -> Walk:
    """Thin a unit-service walk down to service time `target_s`.

    Builds all 2S-1 thinned walks (each keeps every (2S-1)-th covered
    request in coverage order, stretching its idle block with the time saved
    on the skipped neighbours) and returns the best at service `target_s`.
    The winner's reward is at least Rew(walk, I, 1) / (2S-1).
    """
    if target_s < 1:
        raise ValueError("target service time must be >= 1")
    if instance.requests and target_s > instance.l_min:
        raise ServiceExceedsWindow(f"target service {target_s} exceeds minimum window {instance.l_min}")
    cov = coverage(walk, instance, service=1)
    ordered = sorted(cov.covered, key=lambda i: (cov.service_starts[i], i))
    if not ordered:
        return _trivial_walk(instance) if instance.root is not None else Walk(walk.start_vertex, 0, ())
    period = 2 * target_s - 1
    best = None
    best_reward = -1
    for offset in range(period):
        kept = ordered[offset::period]
        if not kept:
            continue
        services = []
        for i in kept:
            t = cov.service_starts[i]
            tau = max(instance.requests[i].release, t - (target_s - 1))
            services.append((i, tau))
        cand = rebuild_schedule_walk(instance, services, target_s)
        reward = coverage(cand, instance, service=target_s).reward
        if reward > best_reward:
            best_reward = reward
            best = cand
    return best


def aligned_phase(instance: Instance, config: OfflineConfig = DEFAULT_CONFIG) -> Walk:
    """Phase-based constant-factor algorithm for zero service times and
    windows of length at least 4D.

    Works in phases of length K = 2D. Rounding releases up and deadlines
    down to multiples of K leaves, for phase i, exactly the requests whose
    true window contains the whole phase; per phase the best rooted
    orienteering path of budget K/2 over the remaining requests is chosen
    among all roots within K/2 of the current position, executed, and the
    phase idled out.
    """
    if instance.service != 0:
        raise ValueError("aligned_phase expects a zero-service instance")
    g = instance.graph
    d = g.diameter
    bad = [i for i, r in enumerate(instance.requests) if r.window < 4 * d]
    if bad:
        raise WindowTooSmall(f"requests {bad} have windows below 4*D={4 * d}")
    if not instance.requests:
        return _trivial_walk(instance)
    if d == 0:
        return Walk(0, 0, (Idle(instance.horizon),) if instance.horizon > 0 else ())
    k = 2 * d
    horizon = instance.horizon
    phases = (horizon + k - 1) // k
    covered: set[int] = set()
    cur: int | None = None
    start_vertex = 0
    actions: list = []
    t = 0
    for i in range(1, phases + 1):
        lo, hi = (i - 1) * k, i * k
        rem = [
            j
            for j, r in enumerate(instance.requests)
            if j not in covered and r.release <= lo and r.deadline >= hi
        ]
        chosen = None
        if rem:
            targets = [(instance.requests[j].vertex, instance.requests[j].reward, 0) for j in rem]
            roots = range(g.n) if cur is None else [w for w in range(g.n) if g.dist[cur][w] <= d]
            for w in roots:
                res = _orienteer(g, targets, w, d, "path", config)
                if res.value > 0 and (chosen is None or res.value > chosen[0].value):
                    chosen = (res, w)
        if chosen is not None:
            res, w = chosen
            if cur is None:
                start_vertex = w
                cur = w
                if t > 0:
                    actions.append(Idle(t))
            elif w != cur:
                actions.append(Move(w))
                t += g.dist[cur][w]
                cur = w
            for act in res.walk.actions:
                actions.append(act)
                if isinstance(act, Move):
                    t += g.dist[cur][act.to]
                    cur = act.to
                else:
                    t += act.duration
            covered.update(rem[j] for j in res.visited)
        if t < hi and cur is not None:
            actions.append(Idle(hi - t))
        t = hi
    if cur is None:
        return Walk(0, 0, ())
    return Walk(start_vertex, 0, tuple(_merge_idles(actions)))


def _window_class_solve(instance: Instance, config: OfflineConfig) -> Walk | None:
    """Best single window-length class, each class solved phase-by-phase.

    Class j holds requests with window in [2^j, 2^(j+1)); its phase length is
    P = max(1, 2^(j-2)) with orienteering budget floor(P/2) from roots within
    P - budget of the current position. A request is available in a phase iff
    its window contains the whole phase, which every class-j request
    satisfies for at least one phase.
    """
    if not instance.requests:
        return None
    g = instance.graph
    classes: dict[int, list[int]] = {}
    for i, r in enumerate(instance.requests):
        classes.setdefault(r.window.bit_length() - 1, []).append(i)
    horizon = instance.horizon
    best_walk = None
    best_reward = -1
    for j in sorted(classes):
        members = classes[j]
        p = max(1, 1 << max(0, j - 2))
        budget = p // 2
        allowance = p - budget
        covered: set[int] = set()
        cur: int | None = None
        start_vertex = 0
        actions: list = []
        t = 0
        phases = (horizon + p - 1) // p
        for i in range(1, phases + 1):
            lo, hi = (i - 1) * p, i * p
            rem = [
                q
                for q in members
                if q not in covered
                and instance.requests[q].release <= lo
                and instance.requests[q].deadline >= hi
            ]
            chosen = None
            if rem:
                targets = [(instance.requests[q].vertex, instance.requests[q].reward, 0) for q in rem]
                roots = (
                    range(g.n)
                    if cur is None
                    else [w for w in range(g.n) if g.dist[cur][w] <= allowance]
                )
                for w in roots:
                    res = _orienteer(g, targets, w, budget, "path", config)
                    if res.value > 0 and (chosen is None or res.value > chosen[0].value):
                        chosen = (res, w)
            if chosen is not None:
                res, w = chosen
                if cur is None:
                    start_vertex = w
                    cur = w
                    if t > 0:
                        actions.append(Idle(t))
                elif w != cur:
                    actions.append(Move(w))
                    t += g.dist[cur][w]
                    cur = w
                for act in res.walk.actions:
                    actions.append(act)
                    if isinstance(act, Move):
                        t += g.dist[cur][act.to]
                        cur = act.to
                    else:
                        t += act.duration
                covered.update(rem[q] for q in res.visited)
            if t < hi and cur is not None:
                actions.append(Idle(hi - t))
            t = hi
        if cur is None:
            continue
        walk = Walk(start_vertex, 0, tuple(_merge_idles(actions)))
        reward = coverage(walk, instance, service=0).reward
        if reward > best_reward:
            best_reward = reward
            best_walk = walk
    return best_walk


def augment_service(instance: Instance) -> tuple[Instance, object]:
    """Reduce service time S >= 1 to zero services on an augmented graph.

    Original edge lengths are doubled; each request gains a pendant vertex at
    edge length S carrying the request (pendant, 2r+S, 2d-S, pi). Requests
    with window <= S cannot be represented (and window < S is uncoverable
    anyway); they are dropped from the augmented instance. The returned
    back_map turns any feasible zero-service walk on the augmented graph into
    a service-S walk on the original with at least the same reward: pendant
    excursions become idle blocks at the host and all times are halved.
    """
    s = instance.service
    d = instance.graph.diameter
    if s < 1:
        raise ValueError("augment_service needs service >= 1")
    if d >= 1 and s > d:
        raise ServiceExceedsDiameter(f"service {s} exceeds diameter {d}")
    g = instance.graph
    kept = [i for i, r in enumerate(instance.requests) if r.window > s]
    n0 = g.n + len(kept)
    edges0 = [(u, v, 2 * length) for u, v, length in g.edges]
    host: dict[int, int] = {}
    aug_requests = []
    for k, i in enumerate(kept):
        r = instance.requests[i]
        pendant = g.n + k
        host[pendant] = r.vertex
        edges0.append((r.vertex, pendant, s))
        aug_requests.append(Request(pendant, 2 * r.release + s, 2 * r.deadline - s, r.reward))
    aug_graph = build_metric(n0, edges0)
    aug_instance = Instance(aug_graph, tuple(aug_requests), service=0, root=instance.root)

    def back_map(walk0: Walk) -> Walk:
        merged: list[list[int]] = []  # [vertex, arrive, depart] on the original graph
        for v, a, b in presence_blocks(walk0, aug_graph):
            if v in host:
                v, a, b = host[v], a - s, b + s
            if merged and merged[-1][0] == v and merged[-1][2] >= a:
                merged[-1][2] = max(merged[-1][2], b)
            else:
                merged.append([v, a, b])
        actions: list = []
        start_vertex = merged[0][0]
        start_time = max(0, merged[0][1] // 2 if merged[0][1] >= 0 else 0)
        t = start_time
        pos = start_vertex
        for v, a, b in merged:
            if v != pos:
                actions.append(Move(v))
                t += g.dist[pos][v]
                pos = v
            depart = b // 2
            if depart > t:
                actions.append(Idle(depart - t))
                t = depart
        return Walk(start_vertex, start_time, tuple(_merge_idles(actions)))

    return aug_instance, back_map


def large_service_solve(instance: Instance) -> Walk:
    """Job-scheduling route for S >= D >= 1.

    Each request becomes a job (release r, deadline d+D, processing S+D);
    a feasible schedule turns into a walk that travels at most D between
    services and idles through each S-block.
    """
    from .oracle import Job, job_scheduling

    s = instance.service
    d = instance.graph.diameter
    if d < 1 or s < d:
        raise ValueError("large_service_solve needs S >= D >= 1")
    if not instance.requests:
        return _trivial_walk(instance)
    jobs = [Job(r.release, r.deadline + d, s + d, r.reward) for r in instance.requests]
    mode = "exact" if len(jobs) <= 15 else "local_ratio"
    _, sched = job_scheduling(jobs, mode)
    services = [(j, t) for j, t in sched]
    return rebuild_schedule_walk(instance, services, s)


def _sit_walks(instance: Instance) -> list[Walk]:
    horizon = instance.horizon
    g = instance.graph
    out = []
    for v in range(g.n):
        if instance.root is not None and instance.root != v:
            travel = g.dist[instance.root][v]
            if travel > horizon:
                continue
            idle = horizon - travel
            acts = (Move(v), Idle(idle)) if idle > 0 else (Move(v),)
            out.append(Walk(instance.root, 0, acts))
        else:
            out.append(Walk(v, 0, (Idle(horizon),) if horizon > 0 else ()))
    return out


def _greedy_walks(instance: Instance) -> list[Walk]:
    g = instance.graph
    s = instance.service
    order = sorted(range(len(instance.requests)), key=lambda i: (instance.requests[i].deadline, i))
    starts = [instance.root] if instance.root is not None else list(range(g.n))
    out = []
    for start in starts:
        pos, t = start, 0
        services = []
        for i in order:
            r = instance.requests[i]
            arrive = t + g.dist[pos][r.vertex]
            tau = max(arrive, r.release)
            if tau > r.deadline - s:
                continue
            services.append((i, tau))
            pos, t = r.vertex, tau + s
        if services:
            out.append(rebuild_schedule_walk(instance, services, s))
    return out


def offline_solve(instance: Instance, config: OfflineConfig = DEFAULT_CONFIG) -> Walk:
    """Dispatcher: large-service job route when S >= D, otherwise the
    service-time augmentation followed by the aligned-phase algorithm on
    large windows and the window-class scheme on small ones. Polynomial
    baseline walks join the candidate pool; the best by recomputed coverage
    wins, normalized through the schedule rebuilder (which also enforces a
    rooted start).
    """
    if not instance.requests:
        return _trivial_walk(instance)
    g = instance.graph
    s = instance.service
    d = g.diameter
    candidates: list[Walk] = []
    candidates.extend(_sit_walks(instance))
    candidates.extend(_greedy_walks(instance))

    if d >= 1 and s >= d:
        candidates.append(large_service_solve(instance))
    elif d >= 1 and s == 0:
        candidates.extend(_split_candidates(instance, instance, None, config))
    elif d >= 1:
        aug, back = augment_service(instance)
        if aug.requests:
            candidates.extend(_split_candidates(aug, instance, back, config))

    best = None
    best_reward = -1
    for cand in candidates:
        cov = coverage(cand, instance)
        services = sorted(cov.service_starts.items(), key=lambda kv: (kv[1], kv[0]))
        normalized = rebuild_schedule_walk(instance, services, s)
        reward = coverage(normalized, instance).reward
        if reward > best_reward:
            best_reward = reward
            best = normalized
    return best


def _split_candidates(work: Instance, original: Instance, back, config: OfflineConfig) -> list[Walk]:
    """Large-window / small-window split on the zero-service instance `work`;
    walks are mapped back to `original` when an augmentation is in play."""
    d0 = work.graph.diameter
    large_idx = [i for i, r in enumerate(work.requests) if r.window >= 4 * d0]
    small_idx = [i for i, r in enumerate(work.requests) if r.window < 4 * d0]
    walks = []
    if large_idx:
        sub = replace(work, requests=tuple(work.requests[i] for i in large_idx))
        walks.append(aligned_phase(sub, config))
    if small_idx:
        sub = replace(work, requests=tuple(work.requests[i] for i in small_idx))
        w = _window_class_solve(sub, config)
        if w is not None:
            walks.append(w)
    if back is not None:
        walks = [back(w) for w in walks]
    return walks
