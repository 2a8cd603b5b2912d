"""Undirected metric graphs: integer edge lengths, exact all-pairs distances, diameter.

Distances are computed eagerly at build time (Floyd-Warshall); every other
module reads them constantly and instances are desk-scale.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import DisconnectedGraph, NonPositiveEdge, VertexOutOfRange


@dataclass(frozen=True)
class MetricGraph:
    """Connected undirected graph with its shortest-path closure.

    `dist` is the full n x n matrix of exact shortest-path lengths and
    `diameter` its maximum entry. Immutable after construction.
    """

    n: int
    edges: tuple[tuple[int, int, int], ...]
    dist: tuple[tuple[int, ...], ...]
    diameter: int

    def distance(self, u: int, v: int) -> int:
        return self.dist[u][v]


def build_metric(n: int, edges) -> MetricGraph:
    """Validate the edge list and return the graph with exact distances.

    Parallel edges keep the minimum length, self-loops are dropped.
    Raises VertexOutOfRange / NonPositiveEdge / DisconnectedGraph.
    """
    if n < 1:
        raise VertexOutOfRange(f"vertex count must be >= 1, got {n}")
    norm = []
    for u, v, length in edges:
        if not (0 <= u < n) or not (0 <= v < n):
            raise VertexOutOfRange(f"edge ({u},{v}) outside 0..{n - 1}")
        if int(length) != length or length < 1:
            raise NonPositiveEdge(f"edge ({u},{v}) has non-positive or fractional length {length}")
        if u == v:
            continue
        norm.append((int(u), int(v), int(length)))

    inf = float("inf")
    d = [[inf] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
    for u, v, length in norm:
        if length < d[u][v]:
            d[u][v] = length
            d[v][u] = length
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == inf:
                continue
            di = d[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
    diameter = 0
    for i in range(n):
        for j in range(n):
            if d[i][j] == inf:
                raise DisconnectedGraph(f"no path between {i} and {j}")
            if d[i][j] > diameter:
                diameter = d[i][j]
    return MetricGraph(
        n=n,
        edges=tuple(sorted(norm)),
        dist=tuple(tuple(int(x) for x in row) for row in d),
        diameter=int(diameter),
    )


def graph_to_json(g: MetricGraph) -> dict:
    """Canonical on-disk form: {"n": int, "edges": [[u, v, len], ...]}."""
    return {"n": g.n, "edges": [list(e) for e in g.edges]}


def graph_from_json(obj: dict) -> MetricGraph:
    return build_metric(int(obj["n"]), [tuple(e) for e in obj["edges"]])
