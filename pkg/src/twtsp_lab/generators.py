"""Instance factories: seeded random instances, controlled prediction
perturbation, and the adversarial lower-bound constructions.

All randomness flows through numpy's Philox generator (counter-based,
64-bit seed), so identical (kind, params, seed) reproduce identical bytes.
Draw order is fixed: graph first, then per-request fields in request order.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .exceptions import InvalidParams, TargetsViolateAssumptions
from .graph import build_metric
from .model import Instance, Request
from .prediction_errors import Matching

RANDOM_DEFAULTS = {
    "n": 5,
    "edge_density": 0.5,
    "max_len": 3,
    "num_requests": 4,
    "window_range": (4, 10),
    "reward_range": (1, 5),
    "release_range": (0, 12),
    "service": 1,
    "distinct_vertices": False,
    "root": None,
}


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def gen_random(params: dict, seed: int) -> Instance:
    """Random connected instance; deterministic given (params, seed)."""
    p = dict(RANDOM_DEFAULTS)
    p.update(params or {})
    n = int(p["n"])
    density = float(p["edge_density"])
    max_len = int(p["max_len"])
    m = int(p["num_requests"])
    wlo, whi = (int(x) for x in p["window_range"])
    plo, phi = (int(x) for x in p["reward_range"])
    rlo, rhi = (int(x) for x in p["release_range"])
    service = int(p["service"])
    if n < 1 or max_len < 1 or m < 0 or service < 0:
        raise InvalidParams("n, max_len must be >= 1; num_requests, service >= 0")
    if not (0.0 <= density <= 1.0):
        raise InvalidParams(f"edge_density must be in [0,1], got {density}")
    if wlo < max(1, service) or whi < wlo:
        raise InvalidParams("window_range must satisfy service <= min <= max and min >= 1")
    if plo < 1 or phi < plo or rlo < 0 or rhi < rlo:
        raise InvalidParams("reward_range needs 1 <= min <= max; release_range 0 <= min <= max")
    if p["distinct_vertices"] and m > n:
        raise InvalidParams("distinct_vertices needs num_requests <= n")

    rng = _rng(seed)
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, int(rng.integers(1, max_len + 1))))
    tree = {(min(u, v), max(u, v)) for u, v, _ in edges}
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) in tree:
                continue
            if rng.random() < density:
                edges.append((u, v, int(rng.integers(1, max_len + 1))))
    graph = build_metric(n, edges)

    if p["distinct_vertices"]:
        vertices = [int(x) for x in rng.permutation(n)[:m]]
    else:
        vertices = [int(rng.integers(0, n)) for _ in range(m)]
    requests = []
    for i in range(m):
        release = int(rng.integers(rlo, rhi + 1))
        window = int(rng.integers(wlo, whi + 1))
        reward = int(rng.integers(plo, phi + 1))
        requests.append(Request(vertices[i], release, release + window, reward))
    root = p["root"]
    return Instance(graph, tuple(requests), service=service, root=None if root is None else int(root))


def perturb_predictions(
    instance: Instance,
    targets: dict,
    seed: int,
    conforming: bool = False,
) -> tuple[Instance, Matching]:
    """Predicted copy of `instance` within the given error targets.

    Each predicted request sits within distance <= lambda of its true
    vertex, its window endpoints move by at most tau, and its reward is an
    integer within a rho factor. Conforming mode (matching the competitive
    guarantee's assumptions) additionally requires 4*lambda <= l_min - 1 and
    2*tau <= l_min, shifts windows rigidly (release and deadline by the
    same delta), and keeps predicted vertices pairwise distinct when the
    true ones are. Returns the identity matching.
    """
    lam = int(targets.get("lambda", 0))
    tau = int(targets.get("tau", 0))
    rho = Fraction(int(targets.get("rho_num", 1)), int(targets.get("rho_den", 1)))
    if lam < 0 or tau < 0 or rho < 1:
        raise InvalidParams("targets need lambda, tau >= 0 and rho >= 1")
    if conforming:
        l_min = instance.l_min
        if 4 * lam > l_min - 1 or 2 * tau > l_min:
            raise TargetsViolateAssumptions(
                f"targets (lambda={lam}, tau={tau}) violate 4*lambda <= l_min-1, 2*tau <= l_min for l_min={l_min}"
            )
    g = instance.graph
    rng = _rng(seed)
    preserve_distinct = conforming and len({r.vertex for r in instance.requests}) == len(instance.requests)
    used: set[int] = set()
    preds = []
    for r in instance.requests:
        if conforming:
            delta = int(rng.integers(max(-tau, -r.release), tau + 1))
            r2, d2 = r.release + delta, r.deadline + delta
        else:
            dr = int(rng.integers(max(-tau, -r.release), tau + 1))
            dd = int(rng.integers(-tau, tau + 1))
            r2 = r.release + dr
            d2 = max(r.deadline + dd, r2 + 1)
        ball = [v for v in range(g.n) if g.dist[r.vertex][v] <= lam]
        if instance.root is not None:
            ok = [v for v in ball if g.dist[instance.root][v] <= r2]
            ball = ok or [r.vertex]
        if preserve_distinct:
            free = [v for v in ball if v not in used]
            ball = free or ball
        v2 = int(ball[rng.integers(0, len(ball))])
        used.add(v2)
        lo = -((-r.reward * rho.denominator) // rho.numerator)  # ceil
        hi = (r.reward * rho.numerator) // rho.denominator
        pi2 = int(rng.integers(lo, hi + 1))
        preds.append(Request(v2, r2, d2, pi2))
    pred = Instance(g, tuple(preds), service=instance.service, root=instance.root)
    return pred, Matching.identity(len(preds))


def derandomize_rewards(instance: Instance, reward_dists, pred_instance: Instance):
    """Reduce randomly drawn rewards to their expectations.

    `reward_dists[i]` lists (value, prob) pairs (probs as Fractions or
    (num, den) tuples summing to 1) for true request i. Expected rewards are
    generally fractional, so every reward (true expectations and predicted
    rewards alike) is scaled by the least common denominator; coverage,
    optima, and reward-error ratios are invariant under a common scale.
    Returns (expected instance, scaled predictions, scale).
    """
    if len(reward_dists) != len(instance.requests):
        raise InvalidParams("one reward distribution per true request required")
    expected = []
    for i, dist in enumerate(reward_dists):
        total = Fraction(0)
        mass = Fraction(0)
        for value, prob in dist:
            p = prob if isinstance(prob, Fraction) else Fraction(*prob)
            if p < 0 or value < 1:
                raise InvalidParams(f"distribution {i} needs values >= 1 and probs >= 0")
            total += value * p
            mass += p
        if mass != 1:
            raise InvalidParams(f"distribution {i} probabilities sum to {mass}, not 1")
        expected.append(total)
    scale = 1
    for e in expected:
        scale = scale * e.denominator // math.gcd(scale, e.denominator)
    det_reqs = tuple(
        Request(r.vertex, r.release, r.deadline, int(e * scale))
        for r, e in zip(instance.requests, expected)
    )
    pred_reqs = tuple(
        Request(p.vertex, p.release, p.deadline, p.reward * scale) for p in pred_instance.requests
    )
    det = Instance(instance.graph, det_reqs, service=instance.service, root=instance.root)
    pred = Instance(pred_instance.graph, pred_reqs, service=pred_instance.service, root=pred_instance.root)
    return det, pred, scale


def adversary_two_vertex(policy, num_requests: int, d: int, length: int):
    """Adaptive two-vertex construction killing any deterministic policy.

    `policy(revealed, t) -> vertex` reports where the walker sits at time t
    given the requests revealed so far. Every (2i+1)*d steps the adversary
    requests the other vertex with window `length <= d`, which the policy
    can never serve in time, while an offline walk serves everything.
    Returns the instance (all rewards 1, opt equals num_requests).
    """
    if d < 1 or not (1 <= length <= d) or num_requests < 1:
        raise InvalidParams("needs D >= 1, 1 <= L <= D, num_requests >= 1")
    graph = build_metric(2, [(0, 1, d)])
    revealed: tuple[Request, ...] = ()
    for i in range(num_requests):
        t = (2 * i + 1) * d
        at = int(policy(revealed, t))
        if at not in (0, 1):
            raise InvalidParams(f"policy returned vertex {at} outside the two-vertex graph")
        revealed = revealed + (Request(1 - at, t, t + length, 1),)
    return Instance(graph, revealed, service=1)


MANY_DEFAULTS = {
    "n": 8,
    "max_len": 2,
    "num_pred": 2,
    "preimages_range": (1, 3),
    "radius": 1,
    "window": 30,
    "release_range": (0, 10),
    "reward_range": (1, 4),
}


def gen_many_to_one(params: dict, seed: int) -> tuple[Instance, Instance, Matching]:
    """Coarse-prediction instance: each predicted request sits at a cluster
    center and captures 1..k true requests within the given radius, sharing
    the center's window (zero time-window error) and summing its reward
    (unit reward error)."""
    p = dict(MANY_DEFAULTS)
    p.update(params or {})
    n = int(p["n"])
    radius = int(p["radius"])
    window = int(p["window"])
    klo, khi = (int(x) for x in p["preimages_range"])
    plo, phi = (int(x) for x in p["reward_range"])
    rlo, rhi = (int(x) for x in p["release_range"])
    num_pred = int(p["num_pred"])
    if n < 2 or num_pred < 1 or num_pred > n or klo < 1 or khi < klo or window < 1:
        raise InvalidParams("many-to-one needs n >= 2, 1 <= num_pred <= n, preimages >= 1, window >= 1")
    rng = _rng(seed)
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, int(rng.integers(1, int(p["max_len"]) + 1))))
    graph = build_metric(n, edges)
    centers = [int(x) for x in rng.permutation(n)[:num_pred]]
    true_reqs = []
    pred_reqs = []
    pairs = []
    for j, c in enumerate(centers):
        release = int(rng.integers(rlo, rhi + 1))
        ball = [v for v in range(n) if graph.dist[c][v] <= radius]
        k = int(rng.integers(klo, khi + 1))
        total = 0
        for _ in range(k):
            v = int(ball[rng.integers(0, len(ball))])
            reward = int(rng.integers(plo, phi + 1))
            pairs.append((len(true_reqs), j))
            true_reqs.append(Request(v, release, release + window, reward))
            total += reward
        pred_reqs.append(Request(c, release, release + window, total))
    inst = Instance(graph, tuple(true_reqs), service=1)
    pred = Instance(graph, tuple(pred_reqs), service=1)
    return inst, pred, Matching.many_to_one(pairs)


def _chain_graph(s: int, k: int, c: int, n_clusters: int):
    edges = []
    for i in range(n_clusters):
        base = i * c
        for a in range(c):
            for b in range(a + 1, c):
                edges.append((base + a, base + b, s))
        if i + 1 < n_clusters:
            nxt = (i + 1) * c
            for a in range(c):
                for b in range(c):
                    edges.append((base + a, nxt + b, k * s))
    return build_metric(n_clusters * c, edges)


def gen_lb(kind: str, params: dict, seed: int):
    """Adversarial constructions. Returns (instance, predictions | None,
    matching | None); the chain kinds come with a same-cluster prediction
    redraw whose profile is exactly (Lambda=S, tau=0, rho=1)."""
    params = params or {}
    if kind == "chain":
        return _gen_chain(params, seed, zero_service=False)
    if kind == "chain0":
        return _gen_chain(params, seed, zero_service=True)
    if kind == "uniform":
        return _gen_uniform(params, seed)
    if kind == "line-service":
        return _gen_line_service(params)
    if kind == "line0":
        return _gen_line_zero(params)
    raise InvalidParams(f"unknown lower-bound kind {kind!r}")


def _gen_chain(params: dict, seed: int, zero_service: bool):
    s = int(params.get("S", 1))
    k = int(params.get("K", 2))
    c = int(params.get("C", 3))
    n = int(params.get("N", 4))
    if min(s, k, n) < 1 or c < 2:
        raise InvalidParams("chain needs S, K, N >= 1 and C >= 2")
    if zero_service and k * s < 2:
        raise InvalidParams("chain0 needs K*S >= 2 for nonempty windows")
    graph = _chain_graph(s, k, c, n)
    rng = _rng(seed)
    true_off = [int(rng.integers(0, c)) for _ in range(n)]
    pred_off = []
    for i in range(n):
        o = int(rng.integers(0, c - 1))
        pred_off.append(o if o < true_off[i] else o + 1)
    reqs, preds = [], []
    for i in range(n):
        if zero_service:
            r, d = i * k * s, (i + 1) * k * s - 1
        else:
            r = i * (k * s + 1)
            d = r + k * s
        reqs.append(Request(i * c + true_off[i], r, d, 1))
        preds.append(Request(i * c + pred_off[i], r, d, 1))
    service = 0 if zero_service else 1
    inst = Instance(graph, tuple(reqs), service=service)
    pred = Instance(graph, tuple(preds), service=service)
    return inst, pred, Matching.identity(n)


def _gen_uniform(params: dict, seed: int):
    n = int(params.get("n", 3))
    m = int(params.get("N", 4))
    d = int(params.get("D", 2))
    length = int(params.get("L", d))
    if n < 2 or m < 1 or d < 1 or not (1 <= length <= d):
        raise InvalidParams("uniform needs n >= 2, N >= 1, D >= 1, 1 <= L <= D")
    edges = [(u, v, d) for u in range(n) for v in range(u + 1, n)]
    graph = build_metric(n, edges)
    rng = _rng(seed)
    reqs = []
    for i in range(m):
        v = int(rng.integers(0, n))
        r = (2 * i + 1) * d
        reqs.append(Request(v, r, r + length, 1))
    return Instance(graph, tuple(reqs), service=1), None, None


def _gen_line_service(params: dict):
    s = int(params.get("S", 2))
    length = int(params.get("L", 2 * s))
    alpha = length + 1 - 2 * s
    if s < 2 or length < 2 * s - 2 or alpha < 1:
        raise InvalidParams(f"line-service needs S >= 2, L >= 2S-2 and alpha = L+1-2S >= 1 (got alpha={alpha})")
    n = 2 * s - 1
    edges = [(i, i + 1, alpha) for i in range(n - 1)]
    graph = build_metric(n, edges)
    reqs = [Request(0, 0, length, 1)]
    for i in range(1, n):
        d = i * alpha + 2 * s - 1
        reqs.append(Request(i, d - length, d, 1))
    return Instance(graph, tuple(reqs), service=s, root=0), None, None


def _gen_line_zero(params: dict):
    d = int(params.get("D", 3))
    length = int(params.get("L", 2))
    if d < 1 or not (1 <= length <= d):
        raise InvalidParams("line0 needs D >= 1 and 1 <= L <= D")
    edges = [(i, i + 1, 1) for i in range(d)]
    graph = build_metric(d + 1, edges)
    reqs = [Request(i, i, length + i, 1) for i in range(d + 1)]
    return Instance(graph, tuple(reqs), service=0), None, None
