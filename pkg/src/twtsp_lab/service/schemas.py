"""Pydantic request/response models mirroring the on-disk JSON forms."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

from .. import model as core
from ..graph import build_metric


class GraphModel(BaseModel):
    n: int
    edges: list[tuple[int, int, int]] = Field(default_factory=list)

    def to_core(self):
        return build_metric(self.n, self.edges)


class RequestModel(BaseModel):
    v: int
    r: int
    d: int
    pi: int

    def to_core(self) -> core.Request:
        return core.Request(self.v, self.r, self.d, self.pi)


class InstanceModel(BaseModel):
    graph: GraphModel
    service: int = 1
    root: Optional[int] = None
    requests: list[RequestModel] = Field(default_factory=list)

    def to_core(self) -> core.Instance:
        return core.Instance(
            self.graph.to_core(),
            tuple(r.to_core() for r in self.requests),
            service=self.service,
            root=self.root,
        )

    @staticmethod
    def from_core(inst: core.Instance) -> "InstanceModel":
        return InstanceModel.model_validate(core.instance_to_json(inst))


class MoveAction(BaseModel):
    move: int
    duration: Optional[int] = None


class IdleAction(BaseModel):
    idle: int


class WalkModel(BaseModel):
    start_vertex: int
    start_time: int = 0
    actions: list[Union[IdleAction, MoveAction]] = Field(default_factory=list)

    def to_core(self) -> core.Walk:
        acts = []
        for a in self.actions:
            if isinstance(a, IdleAction):
                acts.append(core.Idle(a.idle))
            else:
                acts.append(core.Move(a.move, a.duration))
        return core.Walk(self.start_vertex, self.start_time, tuple(acts))

    @staticmethod
    def from_core(walk: core.Walk) -> "WalkModel":
        return WalkModel.model_validate(core.walk_to_json(walk))


class MatchingModel(BaseModel):
    kind: str
    pairs: list[tuple[int, int]] = Field(default_factory=list)


class FractionModel(BaseModel):
    num: int
    den: int


class GenRequest(BaseModel):
    kind: Literal["random", "chain", "chain0", "uniform", "line-service", "line0"]
    params: dict = Field(default_factory=dict)
    seed: int = 0
    perturb: Optional[dict] = None  # random kind only: perturbation targets


class GenResponse(BaseModel):
    instance: InstanceModel
    predictions: Optional[InstanceModel] = None
    matching: Optional[MatchingModel] = None


class OracleRequest(BaseModel):
    instance: InstanceModel
    service: Optional[int] = None  # overrides the instance's service time
    root: Optional[int] = None  # overrides the instance's root
    budget: Optional[int] = None


class OracleResponse(BaseModel):
    value: int
    walk: Optional[WalkModel] = None
    explored_states: int = 0


class OfflineRequest(BaseModel):
    instance: InstanceModel
    service: Optional[int] = None
    exact_orienteering: bool = True


class OfflineResponse(BaseModel):
    walk: WalkModel
    reward: int


class SimulateRequest(BaseModel):
    instance: InstanceModel
    predictions: InstanceModel
    lambda_bound: Union[int, Literal["guess"]] = Field(alias="lambda")
    mode: Literal["one2one", "many2one"] = "one2one"
    epsilon: Union[Literal["all"], int] = "all"
    seed: int = 0
    state_budget: Optional[int] = None

    model_config = {"populate_by_name": True}


class ValidateRequest(BaseModel):
    graph: Optional[GraphModel] = None
    instance: Optional[InstanceModel] = None
    walk: Optional[WalkModel] = None


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[str] = Field(default_factory=list)


class BenchRequest(BaseModel):
    suite: dict
    state_budget: Optional[int] = None
    workers: int = 1
