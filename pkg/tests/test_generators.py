import json

import pytest
from fractions import Fraction

from twtsp_lab.exceptions import InvalidParams, TargetsViolateAssumptions
from twtsp_lab.generators import gen_lb, gen_many_to_one, gen_random, perturb_predictions
from twtsp_lab.harness import canonical_json
from twtsp_lab.model import instance_to_json
from twtsp_lab.oracle import opt_twtsp
from twtsp_lab.prediction_errors import pair_errors, profile


def test_empty_request_list_is_valid():
    inst = gen_random({"num_requests": 0}, seed=1)
    assert opt_twtsp(inst).value == 0


def test_determinism_byte_identical():
    a = gen_random({"n": 6, "num_requests": 5}, seed=42)
    b = gen_random({"n": 6, "num_requests": 5}, seed=42)
    assert canonical_json(instance_to_json(a)) == canonical_json(instance_to_json(b))
    c = gen_random({"n": 6, "num_requests": 5}, seed=43)
    assert canonical_json(instance_to_json(a)) != canonical_json(instance_to_json(c))


def test_windows_can_target_aligned_phase():
    inst = gen_random({"n": 4, "num_requests": 4, "window_range": (40, 60), "max_len": 2}, seed=3)
    d = inst.graph.diameter
    assert all(r.window >= 4 * d for r in inst.requests)


def test_invalid_params():
    with pytest.raises(InvalidParams):
        gen_random({"n": 0}, seed=0)
    with pytest.raises(InvalidParams):
        gen_random({"window_range": (0, 3)}, seed=0)
    with pytest.raises(InvalidParams):
        gen_random({"service": 4, "window_range": (2, 5)}, seed=0)
    with pytest.raises(InvalidParams):
        gen_random({"distinct_vertices": True, "num_requests": 9, "n": 3}, seed=0)


def test_perturb_zero_targets_identity():
    inst = gen_random({"n": 5, "num_requests": 4}, seed=9)
    pred, m = perturb_predictions(inst, {"lambda": 0, "tau": 0, "rho_num": 1, "rho_den": 1}, seed=1)
    assert pred.requests == inst.requests
    assert m.pairs == tuple((i, i) for i in range(4))


@pytest.mark.parametrize("seed", range(10))
def test_perturb_respects_targets(seed):
    inst = gen_random({"n": 6, "num_requests": 5, "window_range": (12, 20), "max_len": 2}, seed)
    targets = {"lambda": 2, "tau": 3, "rho_num": 2, "rho_den": 1}
    pred, m = perturb_predictions(inst, targets, seed + 1)
    prof = profile(inst, pred, m)
    assert prof.lam <= 2 and prof.tau <= 3 and prof.rho <= Fraction(2)
    for r, p in zip(inst.requests, pred.requests):
        assert (r.reward + 1) // 2 <= p.reward <= 2 * r.reward


@pytest.mark.parametrize("seed", range(6))
def test_perturb_conforming_window_preserving(seed):
    inst = gen_random(
        {"n": 6, "num_requests": 4, "window_range": (10, 16), "distinct_vertices": True}, seed
    )
    pred, m = perturb_predictions(inst, {"lambda": 2, "tau": 5}, seed + 1, conforming=True)
    prof = profile(inst, pred, m)
    assert prof.lam <= 2 and prof.tau <= 5
    for r, p in zip(inst.requests, pred.requests):
        assert p.window == r.window
    assert len({p.vertex for p in pred.requests}) == len(pred.requests)


def test_perturb_conforming_rejects_oversized_targets():
    inst = gen_random({"n": 5, "num_requests": 3, "window_range": (4, 6)}, seed=2)
    with pytest.raises(TargetsViolateAssumptions):
        perturb_predictions(inst, {"lambda": 3, "tau": 0}, seed=3, conforming=True)


# --- lower-bound constructions ------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_chain_construction(seed):
    inst, pred, m = gen_lb("chain", {"S": 1, "K": 2, "C": 2, "N": 3}, seed)
    assert opt_twtsp(inst).value == 3
    prof = profile(inst, pred, m)
    assert (prof.lam, prof.tau, prof.rho) == (1, 0, Fraction(1))


def test_chain_default_profile_every_seed():
    for seed in range(8):
        inst, pred, m = gen_lb("chain", {"S": 2, "K": 2, "C": 3, "N": 3}, seed)
        prof = profile(inst, pred, m)
        assert (prof.lam, prof.tau, prof.rho) == (2, 0, Fraction(1))


def test_chain_zero_service():
    inst, pred, m = gen_lb("chain0", {"S": 1, "K": 2, "C": 2, "N": 3}, seed=4)
    assert inst.service == 0
    assert opt_twtsp(inst).value == 3
    prof = profile(inst, pred, m)
    assert (prof.lam, prof.tau, prof.rho) == (1, 0, Fraction(1))


def test_uniform_no_predictions():
    inst, pred, m = gen_lb("uniform", {"n": 3, "N": 4, "D": 2, "L": 2}, seed=5)
    assert pred is None and m is None
    assert opt_twtsp(inst).value == 4
    # the stay-put strategy covers exactly the requests landing on its vertex
    from twtsp_lab.model import Idle, Walk, coverage

    for v in range(3):
        sit = Walk(v, 0, (Idle(inst.horizon),))
        expect = sum(r.reward for r in inst.requests if r.vertex == v)
        assert coverage(sit, inst, service=1).reward == expect


def test_line_service_gap_values():
    inst, _, _ = gen_lb("line-service", {"S": 2, "L": 4}, seed=0)
    assert inst.root == 0
    assert opt_twtsp(inst.with_service(2)).value == 1
    assert opt_twtsp(inst.with_service(1)).value == 3


def test_line_zero_service_values():
    inst, _, _ = gen_lb("line0", {"D": 3, "L": 2}, seed=0)
    assert opt_twtsp(inst.with_service(0)).value == 4
    assert opt_twtsp(inst.with_service(1)).value == 2


def test_lb_determinism_and_bad_kind():
    a = gen_lb("chain", {}, 7)
    b = gen_lb("chain", {}, 7)
    assert canonical_json(instance_to_json(a[0])) == canonical_json(instance_to_json(b[0]))
    assert canonical_json(instance_to_json(a[1])) == canonical_json(instance_to_json(b[1]))
    with pytest.raises(InvalidParams):
        gen_lb("nope", {}, 0)
    with pytest.raises(InvalidParams):
        gen_lb("line-service", {"S": 2, "L": 2}, 0)  # alpha would be < 1


@pytest.mark.parametrize("seed", range(6))
def test_many_to_one_profile_invariants(seed):
    from twtsp_lab.prediction_errors import _group_cycle_length

    inst, pred, m = gen_many_to_one({}, seed)
    prof = profile(inst, pred, m)
    groups = {}
    for i, j in m.pairs:
        groups.setdefault(j, []).append(i)
    lams = []
    for j, pre in groups.items():
        lam_j = _group_cycle_length(inst.graph, pred.requests[j].vertex, [inst.requests[i] for i in pre])
        far = max(inst.graph.dist[pred.requests[j].vertex][inst.requests[i].vertex] for i in pre)
        assert lam_j >= 1 + 2 * far  # must reach the farthest preimage, return, and idle once
        lams.append(lam_j)
    assert prof.lam == max(lams)
    assert prof.tau == 0
    assert prof.rho == Fraction(1)


def test_derandomize_rewards_scales_consistently():
    from twtsp_lab.generators import derandomize_rewards
    from twtsp_lab.graph import build_metric
    from twtsp_lab.model import Instance, Request

    g = build_metric(2, [(0, 1, 1)])
    inst = Instance(g, (Request(0, 0, 4, 1), Request(1, 0, 6, 1)), service=1)
    pred = Instance(g, (Request(0, 0, 4, 2), Request(1, 0, 6, 3)), service=1)
    dists = [
        [(1, Fraction(1, 2)), (2, Fraction(1, 2))],   # E = 3/2
        [(3, Fraction(1, 3)), (6, Fraction(2, 3))],   # E = 5
    ]
    det, pred2, scale = derandomize_rewards(inst, dists, pred)
    assert scale == 2
    assert [r.reward for r in det.requests] == [3, 10]
    assert [p.reward for p in pred2.requests] == [4, 6]
    # reward-error ratios match the unscaled expectations exactly
    loc, tw, rew = pair_errors(det.requests[0], pred2.requests[0], g)
    assert rew == max(Fraction(3, 2) / 2, 2 / Fraction(3, 2))
    # optima scale linearly with the common factor
    base = opt_twtsp(Instance(g, (Request(0, 0, 4, 3), Request(1, 0, 6, 10)), service=1)).value
    assert opt_twtsp(det).value == base


def test_derandomize_rejects_bad_distributions():
    from twtsp_lab.generators import derandomize_rewards
    from twtsp_lab.graph import build_metric
    from twtsp_lab.model import Instance, Request

    g = build_metric(1, [])
    inst = Instance(g, (Request(0, 0, 3, 1),), service=1)
    with pytest.raises(InvalidParams):
        derandomize_rewards(inst, [[(1, Fraction(1, 2))]], inst)
    with pytest.raises(InvalidParams):
        derandomize_rewards(inst, [], inst)


def test_adaptive_two_vertex_adversary():
    from twtsp_lab.generators import adversary_two_vertex
    from twtsp_lab.model import Idle, Walk, coverage

    def stay_put(revealed, t):
        return 0

    def chase_last(revealed, t):
        # moves toward the latest request and reaches it (too late)
        return revealed[-1].vertex if revealed else 0

    for policy in (stay_put, chase_last):
        inst = adversary_two_vertex(policy, num_requests=4, d=3, length=3)
        assert opt_twtsp(inst).value == 4
        # the policy's own trajectory earns nothing: at each release it sits
        # at the wrong vertex and the window is at most the travel time
        for i, r in enumerate(inst.requests):
            assert r.vertex != policy(inst.requests[:i], r.release)
    # the stay-put walk really collects zero
    inst = adversary_two_vertex(stay_put, num_requests=4, d=3, length=3)
    sit = Walk(0, 0, (Idle(inst.horizon),))
    assert coverage(sit, inst, service=1).reward == 0
