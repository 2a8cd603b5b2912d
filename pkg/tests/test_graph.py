import numpy as np
import pytest

from twtsp_lab.exceptions import DisconnectedGraph, NonPositiveEdge, VertexOutOfRange
from twtsp_lab.graph import build_metric, graph_from_json, graph_to_json

from conftest import random_connected_graph
from oracles import dijkstra_all_pairs


def test_single_vertex():
    g = build_metric(1, [])
    assert g.dist == ((0,),)
    assert g.diameter == 0


def test_path_composition(path3):
    assert path3.dist[0][2] == 5
    assert path3.diameter == 5


def test_chord_shortcut():
    # path of unit edges plus chord (0,3,1); Floyd-Warshall by hand gives
    # dist(0,3)=1 and diameter 2
    g = build_metric(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)])
    assert g.dist[0][3] == 1
    assert g.diameter == 2


def test_parallel_edges_and_self_loops():
    g = build_metric(2, [(0, 1, 5), (0, 1, 2), (1, 1, 9)])
    assert g.dist[0][1] == 2
    assert g.edges == ((0, 1, 2), (0, 1, 5))


def test_errors():
    with pytest.raises(DisconnectedGraph):
        build_metric(2, [])
    with pytest.raises(NonPositiveEdge):
        build_metric(2, [(0, 1, 0)])
    with pytest.raises(VertexOutOfRange):
        build_metric(2, [(0, 2, 1)])
    with pytest.raises(VertexOutOfRange):
        build_metric(0, [])


@pytest.mark.parametrize("seed", range(20))
def test_matches_dijkstra_and_metric_axioms(seed):
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(rng.integers(2, 13))
    g = random_connected_graph(rng, n)
    ref = dijkstra_all_pairs(g.n, g.edges)
    for u in range(g.n):
        for v in range(g.n):
            assert g.dist[u][v] == ref[u][v]
            assert g.dist[u][v] == g.dist[v][u]
            for w in range(g.n):
                assert g.dist[u][w] <= g.dist[u][v] + g.dist[v][w]
        assert g.dist[u][u] == 0
    assert g.diameter == max(max(row) for row in g.dist)


def test_json_roundtrip(path3):
    obj = graph_to_json(path3)
    assert obj == {"n": 3, "edges": [[0, 1, 2], [1, 2, 3]]}
    assert graph_from_json(obj) == path3
