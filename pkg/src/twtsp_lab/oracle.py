"""Exact desk-scale solvers: optimal TW-TSP-S walks, rooted orienteering,
single-machine throughput scheduling.

These are the ground truth for every empirical ratio in the test suite.
They certify small instances only; there is no ambition to scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import StateBudgetExceeded, TooManyJobs, TooManyTargets
from .graph import MetricGraph
from .model import Idle, Instance, Move, Walk

DEFAULT_STATE_BUDGET = 10**8


@dataclass(frozen=True)
class OracleResult:
    value: int
    walk: Walk | None
    explored_states: int
    visited: tuple[int, ...] = ()  # orienteering: chosen target indices in visit order


@dataclass(frozen=True)
class Job:
    release: int
    deadline: int
    processing: int
    reward: int

    def latest_start(self) -> int:
        return self.deadline - self.processing


def _merge_actions(actions: list) -> tuple:
    """Collapse consecutive unit idles into one Idle block."""
    out: list = []
    for act in actions:
        if isinstance(act, Idle) and out and isinstance(out[-1], Idle):
            out[-1] = Idle(out[-1].duration + act.duration)
        else:
            out.append(act)
    return tuple(out)


def opt_twtsp(instance: Instance, state_budget: int = DEFAULT_STATE_BUDGET) -> OracleResult:
    """Exact optimum reward over all walks, with one optimal walk.

    Dynamic program over (time, vertex, covered-mask, idle-streak). Covering
    is applied in batch after every idle step: a request joins the mask as
    soon as the current idle run contains an in-window service block, which
    reproduces coverage() exactly (several co-located requests may be covered
    by the same run). Respects instance.root when set, otherwise the best
    start vertex wins; starting at time 0 dominates any later start.
    """
    g = instance.graph
    reqs = instance.requests
    s = instance.service
    m = len(reqs)
    root = instance.root
    if m == 0:
        return OracleResult(0, Walk(root if root is not None else 0, 0, ()), 0)
    horizon = instance.horizon
    required = g.n * (horizon + 1) * (1 << m)
    if required > state_budget:
        raise StateBudgetExceeded(required, state_budget)

    by_vertex: dict[int, list[int]] = {}
    for i, r in enumerate(reqs):
        by_vertex.setdefault(r.vertex, []).append(i)

    cap = max(s, 1)

    def cover(v: int, mask: int, t: int, streak: int) -> tuple[int, int]:
        gained = 0
        for i in by_vertex.get(v, ()):
            bit = 1 << i
            if mask & bit:
                continue
            r = reqs[i]
            if s == 0:
                if r.release <= t <= r.deadline:
                    mask |= bit
                    gained += r.reward
            elif streak >= s and t - s >= r.release and t <= r.deadline:
                mask |= bit
                gained += r.reward
        return mask, gained

    # layers[t]: {(v, mask, streak): reward}; parents for reconstruction
    layers: list[dict] = [dict() for _ in range(horizon + 1)]
    parent: dict = {}
    explored = 0

    def relax(t, key, reward, par):
        nonlocal explored
        layer = layers[t]
        old = layer.get(key)
        if old is None or reward > old:
            if old is None:
                explored += 1
            layer[key] = reward
            parent[(t, key)] = par

    starts = [root] if root is not None else list(range(g.n))
    for v in starts:
        mask, gained = cover(v, 0, 0, 0) if s == 0 else (0, 0)
        relax(0, (v, mask, 0), gained, None)

    best_reward = -1
    best_state = None
    for t in range(horizon + 1):
        for key, reward in list(layers[t].items()):
            v, mask, streak = key
            if reward > best_reward:
                best_reward = reward
                best_state = (t, key)
            if t == horizon:
                continue
            # idle one step
            ns = min(cap, streak + 1)
            nmask, gained = cover(v, mask, t + 1, ns)
            relax(t + 1, (v, nmask, ns), reward + gained, (t, key, Idle(1)))
            # move to another vertex
            for w in range(g.n):
                if w == v:
                    continue
                ta = t + g.dist[v][w]
                if ta > horizon:
                    continue
                if s == 0:
                    wmask, wg = cover(w, mask, ta, 0)
                else:
                    wmask, wg = mask, 0
                relax(ta, (w, wmask, 0), reward + wg, (t, key, Move(w)))

    # reconstruct
    actions = []
    cur = best_state
    while cur is not None:
        par = parent[cur]
        if par is None:
            break
        pt, pkey, act = par
        actions.append(act)
        cur = (pt, pkey)
    actions.reverse()
    walk = Walk(start_vertex=cur[1][0], start_time=0, actions=_merge_actions(actions))
    return OracleResult(best_reward, walk, explored)


def orienteering_exact(
    graph: MetricGraph,
    targets,
    root: int,
    budget: int,
    mode: str = "path",
) -> OracleResult:
    """Max-reward subset of targets visitable within `budget` from `root`.

    `targets` is a sequence of (vertex, reward, service) triples; visiting a
    target costs the travel plus its service time, and each target counts
    once. Cycle mode must return to the root within budget. Held-Karp over
    target subsets; at most 15 targets.
    """
    if mode not in ("path", "cycle"):
        raise ValueError(f"unknown mode {mode!r}")
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    tg = [(int(v), int(rw), int(sv)) for v, rw, sv in targets]
    m = len(tg)
    if m > 15:
        raise TooManyTargets(f"{m} targets exceed the exact cap of 15")
    if m == 0:
        return OracleResult(0, Walk(root, 0, ()), 0)

    dist = graph.dist
    size = 1 << m
    INF = float("inf")
    dp = [[INF] * m for _ in range(size)]
    par: list[list[tuple[int, int] | None]] = [[None] * m for _ in range(size)]
    for j, (v, _, sv) in enumerate(tg):
        dp[1 << j][j] = dist[root][v] + sv
    for mask in range(1, size):
        row = dp[mask]
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            c = row[j]
            if c == INF:
                continue
            vj = tg[j][0]
            for k in range(m):
                if (mask >> k) & 1:
                    continue
                nm = mask | (1 << k)
                nc = c + dist[vj][tg[k][0]] + tg[k][2]
                if nc < dp[nm][k]:
                    dp[nm][k] = nc
                    par[nm][k] = (mask, j)

    best_value = 0
    best = None  # (mask, last, cost) or None for the empty route
    for mask in range(1, size):
        value = sum(tg[j][1] for j in range(m) if (mask >> j) & 1)
        feas = None
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            c = dp[mask][j]
            if c == INF:
                continue
            total = c + (dist[tg[j][0]][root] if mode == "cycle" else 0)
            if total <= budget and (feas is None or total < feas[1]):
                feas = (j, total)
        if feas is None:
            continue
        if value > best_value or (
            value == best_value and best is not None and feas[1] < best[2]
        ):
            best_value = value
            best = (mask, feas[0], feas[1])

    explored = size * m
    if best is None:
        return OracleResult(0, Walk(root, 0, ()), explored)

    order = []
    mask, last, _ = best
    while last is not None:
        order.append(last)
        p = par[mask][last]
        if p is None:
            break
        mask, last = p
    order.reverse()

    actions: list = []
    pos = root
    for j in order:
        v, _, sv = tg[j]
        if v != pos:
            actions.append(Move(v))
            pos = v
        if sv > 0:
            actions.append(Idle(sv))
    if mode == "cycle" and pos != root:
        actions.append(Move(root))
    walk = Walk(start_vertex=root, start_time=0, actions=_merge_actions(actions))
    return OracleResult(best_value, walk, explored, visited=tuple(order))


def greedy_orienteering(
    graph: MetricGraph,
    targets,
    root: int,
    budget: int,
    mode: str = "path",
) -> OracleResult:
    """Nearest-reward-ratio surrogate for instances beyond the exact cap."""
    tg = [(int(v), int(rw), int(sv)) for v, rw, sv in targets]
    dist = graph.dist
    # best single target as a floor for the ratio-greedy route
    single = None
    for j, (v, rw, sv) in enumerate(tg):
        cost = dist[root][v] + sv + (dist[v][root] if mode == "cycle" else 0)
        if cost <= budget and (single is None or rw > tg[single][1]):
            single = j
    pos = root
    spent = 0
    chosen: list[int] = []
    remaining = set(range(len(tg)))
    while True:
        best_j = None
        best_key = None
        for j in remaining:
            v, rw, sv = tg[j]
            step = dist[pos][v] + sv
            back = dist[v][root] if mode == "cycle" else 0
            if spent + step + back > budget:
                continue
            key = (-(rw / (step + 1)), dist[pos][v], j)
            if best_key is None or key < best_key:
                best_key = key
                best_j = j
        if best_j is None:
            break
        v, rw, sv = tg[best_j]
        spent += dist[pos][v] + sv
        pos = v
        chosen.append(best_j)
        remaining.discard(best_j)
    if single is not None and tg[single][1] > sum(tg[j][1] for j in chosen):
        chosen = [single]
    actions: list = []
    p = root
    for j in chosen:
        v, _, sv = tg[j]
        if v != p:
            actions.append(Move(v))
            p = v
        if sv > 0:
            actions.append(Idle(sv))
    if mode == "cycle" and p != root:
        actions.append(Move(root))
    value = sum(tg[j][1] for j in chosen)
    return OracleResult(value, Walk(root, 0, _merge_actions(actions)), len(tg), visited=tuple(chosen))


def job_scheduling(jobs, mode: str = "exact") -> tuple[int, list[tuple[int, int]]]:
    """Max-reward non-overlapping schedule of jobs on one machine.

    Each scheduled job j runs [t, t+p_j) with t in [r_j, d_j - p_j]. Exact
    mode is a subset DP keyed on earliest finish time (jobs <= 15);
    local_ratio is the classic 2-approximation on the discretized candidate
    intervals. Returns (value, [(job index, start time), ...]).
    """
    jobs = list(jobs)
    if mode == "exact":
        return _jobs_exact(jobs)
    if mode == "local_ratio":
        return _jobs_local_ratio(jobs)
    raise ValueError(f"unknown mode {mode!r}")


def _jobs_exact(jobs: list[Job]) -> tuple[int, list[tuple[int, int]]]:
    m = len(jobs)
    if m > 15:
        raise TooManyJobs(f"{m} jobs exceed the exact cap of 15")
    size = 1 << m
    INF = float("inf")
    finish = [INF] * size
    finish[0] = 0
    par: list[tuple[int, int, int] | None] = [None] * size  # (prev mask, job, start)
    for mask in range(size):
        f = finish[mask]
        if f == INF:
            continue
        for j in range(m):
            if (mask >> j) & 1:
                continue
            job = jobs[j]
            t = max(job.release, f)
            if t > job.latest_start():
                continue
            nm = mask | (1 << j)
            nf = t + job.processing
            if nf < finish[nm]:
                finish[nm] = nf
                par[nm] = (mask, j, t)
    best_mask = 0
    best_value = 0
    for mask in range(size):
        if finish[mask] == INF:
            continue
        value = sum(jobs[j].reward for j in range(m) if (mask >> j) & 1)
        if value > best_value:
            best_value = value
            best_mask = mask
    sched = []
    mask = best_mask
    while mask:
        pmask, j, t = par[mask]
        sched.append((j, t))
        mask = pmask
    sched.reverse()
    return best_value, sched


def _jobs_local_ratio(jobs: list[Job]) -> tuple[int, list[tuple[int, int]]]:
    intervals = []  # (job, start, end)
    for j, job in enumerate(jobs):
        for t in range(job.release, job.latest_start() + 1):
            intervals.append((j, t, t + job.processing))
    w = {idx: jobs[iv[0]].reward for idx, iv in enumerate(intervals)}
    stack = []
    while True:
        pick = None
        for idx, iv in enumerate(intervals):
            if w[idx] <= 0:
                continue
            if pick is None or (iv[2], iv[0], iv[1]) < (
                intervals[pick][2],
                intervals[pick][0],
                intervals[pick][1],
            ):
                pick = idx
        if pick is None:
            break
        eps = w[pick]
        pj, ps, pe = intervals[pick]
        for idx, iv in enumerate(intervals):
            if w[idx] <= 0:
                continue
            if iv[0] == pj or (iv[1] < pe and ps < iv[2]):
                w[idx] -= eps
        stack.append(pick)
    chosen: list[int] = []
    used_jobs = set()
    for idx in reversed(stack):
        j, s0, e0 = intervals[idx]
        if j in used_jobs:
            continue
        if any(s0 < intervals[c][2] and intervals[c][1] < e0 for c in chosen):
            continue
        chosen.append(idx)
        used_jobs.add(j)
    sched = sorted(((intervals[c][0], intervals[c][1]) for c in chosen), key=lambda x: x[1])
    value = sum(jobs[j].reward for j, _ in sched)
    return value, sched
