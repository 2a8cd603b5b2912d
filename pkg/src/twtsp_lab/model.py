"""Requests, instances, walks, and the exact coverage semantics with service times.

Time is discrete. A walk starts at a vertex at an integer time >= 0 and
alternates shortest-path moves (clock advances by the metric distance,
intermediate vertices are not visitable mid-move) with idle periods. A
request with service time S is covered when the walk idles at its vertex
for S consecutive steps starting inside [release, deadline - S]; with S=0
it suffices to occupy the vertex at some integer time in [release, deadline]
(deadline inclusive).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .exceptions import InfeasibleWalk, VertexOutOfRange
from .graph import MetricGraph, graph_from_json, graph_to_json


@dataclass(frozen=True)
class Request:
    vertex: int
    release: int
    deadline: int
    reward: int

    @property
    def window(self) -> int:
        return self.deadline - self.release


@dataclass(frozen=True)
class Instance:
    """A TW-TSP-S instance: graph, request list, service time, optional root.

    Rooted reachability (dist(root, v) <= release for every request) is not
    enforced: the tight service-gap line instances intentionally violate it.
    Use `rooted_reachable()` to query it.
    """

    graph: MetricGraph
    requests: tuple[Request, ...]
    service: int = 1
    root: int | None = None

    def __post_init__(self):
        if self.service < 0:
            raise ValueError(f"service time must be >= 0, got {self.service}")
        if self.root is not None and not (0 <= self.root < self.graph.n):
            raise VertexOutOfRange(f"root {self.root} outside 0..{self.graph.n - 1}")
        for i, r in enumerate(self.requests):
            if not (0 <= r.vertex < self.graph.n):
                raise VertexOutOfRange(f"request {i} vertex {r.vertex} out of range")
            if r.release < 0:
                raise ValueError(f"request {i} has negative release {r.release}")
            if r.deadline <= r.release:
                raise ValueError(f"request {i} window empty: [{r.release},{r.deadline}]")
            if r.reward < 1:
                raise ValueError(f"request {i} reward must be >= 1, got {r.reward}")
        object.__setattr__(self, "requests", tuple(self.requests))

    @property
    def l_min(self) -> int:
        if not self.requests:
            return 0
        return min(r.window for r in self.requests)

    @property
    def l_max(self) -> int:
        if not self.requests:
            return 0
        return max(r.window for r in self.requests)

    @property
    def horizon(self) -> int:
        """Latest deadline; later actions cannot change coverage."""
        return max((r.deadline for r in self.requests), default=0)

    def rooted_reachable(self) -> bool:
        if self.root is None:
            return True
        return all(self.graph.dist[self.root][r.vertex] <= r.release for r in self.requests)

    def with_service(self, service: int) -> "Instance":
        return replace(self, service=service)


@dataclass(frozen=True)
class Move:
    to: int
    duration: int | None = None  # optional recorded duration, checked against dist


@dataclass(frozen=True)
class Idle:
    duration: int


Action = Move | Idle


@dataclass(frozen=True)
class Walk:
    start_vertex: int
    start_time: int = 0
    actions: tuple[Action, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))


@dataclass(frozen=True)
class CoverageReport:
    covered: frozenset[int]
    reward: int
    service_starts: dict[int, int] = field(default_factory=dict)


def validate_walk(walk: Walk, graph: MetricGraph) -> list[str]:
    """Return all violations (empty list == feasible walk)."""
    out = []
    if not (0 <= walk.start_vertex < graph.n):
        out.append(f"start vertex {walk.start_vertex} out of range")
        return out
    if walk.start_time < 0:
        out.append(f"negative start time {walk.start_time}")
    t = max(walk.start_time, 0)
    pos = walk.start_vertex
    for k, act in enumerate(walk.actions):
        if isinstance(act, Idle):
            if act.duration < 1:
                out.append(f"non-positive idle (action {k} at t={t})")
            else:
                t += act.duration
        elif isinstance(act, Move):
            if not (0 <= act.to < graph.n):
                out.append(f"move target {act.to} out of range (action {k} at t={t})")
                continue
            d = graph.dist[pos][act.to]
            if act.duration is not None and act.duration != d:
                out.append(
                    f"move duration mismatch (action {k} at t={t}): recorded {act.duration}, dist {d}"
                )
            t += d
            pos = act.to
        else:
            out.append(f"unknown action {act!r} (action {k})")
    return out


def presence_blocks(walk: Walk, graph: MetricGraph) -> list[tuple[int, int, int]]:
    """Maximal (vertex, arrive, depart) presence intervals, idle runs merged.

    The walk occupies `vertex` at every integer time in [arrive, depart];
    during moves it occupies nothing.
    """
    blocks = []
    pos = walk.start_vertex
    t = walk.start_time
    start = t
    for act in walk.actions:
        if isinstance(act, Idle):
            t += act.duration
        else:
            d = graph.dist[pos][act.to]
            if d == 0:
                continue
            blocks.append((pos, start, t))
            t += d
            pos = act.to
            start = t
    blocks.append((pos, start, t))
    return blocks


def walk_duration(walk: Walk, graph: MetricGraph) -> int:
    blocks = presence_blocks(walk, graph)
    return blocks[-1][2] - walk.start_time


def walk_end(walk: Walk, graph: MetricGraph) -> tuple[int, int]:
    """Final (vertex, time) of the walk."""
    blocks = presence_blocks(walk, graph)
    return blocks[-1][0], blocks[-1][2]


def coverage(walk: Walk, instance: Instance, service: int | None = None) -> CoverageReport:
    """Exact coverage of `instance` by `walk` at the given service time.

    One idle block may cover several co-located requests; coverage is
    evaluated per request. `service_starts` records the earliest feasible
    start per covered request. Raises InfeasibleWalk on validation failure.
    """
    violations = validate_walk(walk, instance.graph)
    if violations:
        raise InfeasibleWalk(violations)
    s = instance.service if service is None else service
    blocks = presence_blocks(walk, instance.graph)
    at_vertex: dict[int, list[tuple[int, int]]] = {}
    for v, a, b in blocks:
        at_vertex.setdefault(v, []).append((a, b))
    covered = set()
    starts: dict[int, int] = {}
    for i, req in enumerate(instance.requests):
        best = None
        for a, b in at_vertex.get(req.vertex, ()):
            if s == 0:
                lo = max(a, req.release)
                hi = min(b, req.deadline)
            else:
                lo = max(a, req.release)
                hi = min(b - s, req.deadline - s)
            if lo <= hi and (best is None or lo < best):
                best = lo
        if best is not None:
            covered.add(i)
            starts[i] = best
    reward = sum(instance.requests[i].reward for i in covered)
    return CoverageReport(covered=frozenset(covered), reward=reward, service_starts=starts)


# --- JSON forms ----------------------------------------------------------

def request_to_json(r: Request) -> dict:
    return {"v": r.vertex, "r": r.release, "d": r.deadline, "pi": r.reward}


def request_from_json(obj: dict) -> Request:
    return Request(vertex=int(obj["v"]), release=int(obj["r"]), deadline=int(obj["d"]), reward=int(obj["pi"]))


def instance_to_json(inst: Instance) -> dict:
    return {
        "graph": graph_to_json(inst.graph),
        "service": inst.service,
        "root": inst.root,
        "requests": [request_to_json(r) for r in inst.requests],
    }


def instance_from_json(obj: dict) -> Instance:
    return Instance(
        graph=graph_from_json(obj["graph"]),
        requests=tuple(request_from_json(r) for r in obj["requests"]),
        service=int(obj.get("service", 1)),
        root=None if obj.get("root") is None else int(obj["root"]),
    )


def walk_to_json(walk: Walk) -> dict:
    actions = []
    for act in walk.actions:
        if isinstance(act, Idle):
            actions.append({"idle": act.duration})
        elif act.duration is None:
            actions.append({"move": act.to})
        else:
            actions.append({"move": act.to, "duration": act.duration})
    return {"start_vertex": walk.start_vertex, "start_time": walk.start_time, "actions": actions}


def walk_from_json(obj: dict) -> Walk:
    actions: list[Action] = []
    for a in obj.get("actions", ()):
        if "idle" in a:
            actions.append(Idle(int(a["idle"])))
        else:
            dur = a.get("duration")
            actions.append(Move(int(a["move"]), None if dur is None else int(dur)))
    return Walk(
        start_vertex=int(obj["start_vertex"]),
        start_time=int(obj.get("start_time", 0)),
        actions=tuple(actions),
    )
