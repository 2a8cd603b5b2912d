import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
import pytest

from twtsp_lab.graph import build_metric
from twtsp_lab.model import Instance, Request


@pytest.fixture
def path3():
    """Unit-spirit path 0-1-2 with lengths 2 and 3."""
    return build_metric(3, [(0, 1, 2), (1, 2, 3)])


@pytest.fixture
def unit_path3():
    return build_metric(3, [(0, 1, 1), (1, 2, 1)])


def random_connected_graph(rng: np.random.Generator, n: int, max_len: int = 3, density: float = 0.4):
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, int(rng.integers(1, max_len + 1))))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                edges.append((u, v, int(rng.integers(1, max_len + 1))))
    return build_metric(n, edges)


def random_instance(
    seed: int,
    n_max: int = 5,
    m_max: int = 4,
    service: int = 1,
    window: tuple[int, int] = (2, 8),
    release_max: int = 8,
    reward_max: int = 5,
    distinct: bool = False,
):
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(rng.integers(2, n_max + 1))
    g = random_connected_graph(rng, n)
    m = int(rng.integers(1, m_max + 1))
    if distinct:
        m = min(m, n)
        vertices = [int(x) for x in rng.permutation(n)[:m]]
    else:
        vertices = [int(rng.integers(0, n)) for _ in range(m)]
    reqs = []
    for i in range(m):
        r = int(rng.integers(0, release_max + 1))
        w = int(rng.integers(window[0], window[1] + 1))
        reqs.append(Request(vertices[i], r, r + w, int(rng.integers(1, reward_max + 1))))
    return Instance(g, tuple(reqs), service=service)
