"""FastAPI service wrapping the core solvers.

Every endpoint is a pure compute call over JSON bodies; nothing is stored
server-side. Domain errors map to 422 (bad input) or 409 (state budget),
with a machine-readable error code in the body.
"""

from __future__ import annotations

import tempfile
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, HTTPException

from .. import exceptions as exc
from ..generators import gen_lb, gen_random, perturb_predictions
from ..harness import SimConfig, bench, report_to_json, simulate
from ..model import coverage, validate_walk
from ..offline import OfflineConfig, offline_solve
from ..oracle import DEFAULT_STATE_BUDGET, opt_twtsp
from ..prediction_errors import matching_to_json
from . import schemas as sc

_BAD_INPUT = (
    exc.VertexOutOfRange,
    exc.NonPositiveEdge,
    exc.DisconnectedGraph,
    exc.InvalidParams,
    exc.TargetsViolateAssumptions,
    exc.SizeMismatch,
    exc.KindMismatch,
    exc.IndexOutOfRange,
    exc.ServiceExceedsWindow,
    exc.ServiceExceedsDiameter,
    exc.WindowTooSmall,
    exc.BadSuiteFile,
    exc.InfeasibleWalk,
    exc.InfeasiblePrecomputedWalk,
    ValueError,
)


def create_app() -> FastAPI:
    app = FastAPI(title="twtsp-lab", version="0.1.0")

    @app.exception_handler(exc.StateBudgetExceeded)
    async def _budget(request, e):
        from fastapi.responses import JSONResponse

        return JSONResponse(
            status_code=409,
            content={"error": "state_budget_exceeded", "required": e.required, "budget": e.budget},
        )

    def _bad(e: Exception) -> HTTPException:
        return HTTPException(status_code=422, detail={"error": type(e).__name__, "message": str(e)})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/gen", response_model=sc.GenResponse, response_model_exclude_none=False)
    def gen(req: sc.GenRequest):
        try:
            if req.kind == "random":
                instance = gen_random(req.params, req.seed)
                pred = matching = None
                if req.perturb is not None:
                    pred_inst, m = perturb_predictions(
                        instance, req.perturb, req.seed + 1, conforming=bool(req.perturb.get("conforming", False))
                    )
                    pred = sc.InstanceModel.from_core(pred_inst)
                    matching = sc.MatchingModel.model_validate(matching_to_json(m))
                return sc.GenResponse(instance=sc.InstanceModel.from_core(instance), predictions=pred, matching=matching)
            instance, pred_inst, m = gen_lb(req.kind, req.params, req.seed)
            return sc.GenResponse(
                instance=sc.InstanceModel.from_core(instance),
                predictions=None if pred_inst is None else sc.InstanceModel.from_core(pred_inst),
                matching=None if m is None else sc.MatchingModel.model_validate(matching_to_json(m)),
            )
        except _BAD_INPUT as e:
            raise _bad(e)

    @app.post("/oracle", response_model=sc.OracleResponse, response_model_exclude_none=True)
    def oracle(req: sc.OracleRequest):
        try:
            inst = req.instance.to_core()
            if req.service is not None:
                inst = inst.with_service(req.service)
            if req.root is not None:
                inst = replace(inst, root=req.root)
            res = opt_twtsp(inst, req.budget if req.budget is not None else DEFAULT_STATE_BUDGET)
        except _BAD_INPUT as e:
            raise _bad(e)
        return sc.OracleResponse(
            value=res.value,
            walk=None if res.walk is None else sc.WalkModel.from_core(res.walk),
            explored_states=res.explored_states,
        )

    @app.post("/offline", response_model=sc.OfflineResponse, response_model_exclude_none=True)
    def offline(req: sc.OfflineRequest):
        try:
            inst = req.instance.to_core()
            if req.service is not None:
                inst = inst.with_service(req.service)
            walk = offline_solve(inst, OfflineConfig(exact_orienteering=req.exact_orienteering))
            reward = coverage(walk, inst).reward
        except _BAD_INPUT as e:
            raise _bad(e)
        return sc.OfflineResponse(walk=sc.WalkModel.from_core(walk), reward=reward)

    @app.post("/simulate")
    def sim(req: sc.SimulateRequest):
        try:
            config = SimConfig(state_budget=req.state_budget or DEFAULT_STATE_BUDGET)
            rep = simulate(
                req.instance.to_core(),
                req.predictions.to_core(),
                req.lambda_bound,
                mode=req.mode,
                seed=req.seed,
                config=config,
            )
            out = report_to_json(rep)
            if req.epsilon != "all":
                eps = int(req.epsilon)
                if eps not in (-1, 0, 1):
                    raise ValueError("epsilon must be -1, 0, 1 or 'all'")
                out["per_epsilon_rewards"] = {str(eps): rep.per_epsilon_rewards[eps]}
                out["expected_reward"] = {"num": rep.per_epsilon_rewards[eps], "den": 1}
                out["ratio"] = None
            return out
        except _BAD_INPUT as e:
            raise _bad(e)

    @app.post("/validate", response_model=sc.ValidateResponse)
    def validate(req: sc.ValidateRequest):
        violations: list[str] = []
        try:
            g = None
            if req.graph is not None:
                g = req.graph.to_core()
            if req.instance is not None:
                inst = req.instance.to_core()
                g = inst.graph
            if req.walk is not None:
                if g is None:
                    raise ValueError("walk validation needs a graph or an instance")
                violations = validate_walk(req.walk.to_core(), g)
        except _BAD_INPUT as e:
            violations = [f"{type(e).__name__}: {e}"]
        return sc.ValidateResponse(ok=not violations, violations=violations)

    @app.post("/bench")
    def bench_endpoint(req: sc.BenchRequest):
        try:
            with tempfile.TemporaryDirectory() as tmp:
                summary = bench(
                    req.suite,
                    tmp,
                    state_budget=req.state_budget or DEFAULT_STATE_BUDGET,
                    workers=req.workers,
                )
                files = {p.name: p.read_text() for p in Path(tmp).iterdir()}
            return {"rows": summary["rows"], "aggregates": summary["aggregates"], "files": files}
        except _BAD_INPUT as e:
            raise _bad(e)

    return app


app = create_app()
