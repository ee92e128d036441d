"""Pydantic request/response models for the service endpoints.

These mirror the JSON file formats one-to-one: a dictionary payload is
exactly the dictionary-file schema, a solve response is exactly the
solution-list report, and so on, so a file produced by the CLI can be
posted to the service unchanged.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class DictionaryPayload(BaseModel):
    schema_: str = Field(default="lsa/1", alias="schema")
    m: int
    n: int
    complex: bool = False
    columns: list[list[Any]]

    model_config = {"populate_by_name": True}


class TargetPayload(BaseModel):
    label: str = "b"
    values: list[Any]


class AnalyzeRequest(BaseModel):
    dictionary: DictionaryPayload
    k: int = 1
    rank_tol: float | None = None
    budget: int | None = None


class InvariantReportModel(BaseModel):
    schema_: str = Field(default="lsa/1", alias="schema")
    kind: Literal["invariants"] = "invariants"
    coherence: float
    spark: int | Literal["infinite"]
    generalized_coherence: dict[str, float]
    rank: int
    rank_tol: float
    column_norm_tol: float

    model_config = {"populate_by_name": True}


class ConstructRequest(BaseModel):
    name: str
    params: dict[str, float] = Field(default_factory=dict)


class ConstructResponse(BaseModel):
    name: str
    dictionary: DictionaryPayload
    targets: list[TargetPayload]
    predicted: dict[str, Any]
    parameters: dict[str, Any]


class SolveRequest(BaseModel):
    dictionary: DictionaryPayload
    target: TargetPayload
    problem: Literal["sparse", "approx"]
    k: int
    eps: float | None = None
    mode: Literal["exact-size", "minimal-supports"] = "exact-size"
    restrict: int | None = None
    eq_tol: float | None = None
    budget: int | None = None


class SolutionModel(BaseModel):
    support: list[int]
    coefficients: list[Any]
    residual: float
    coeffs_unique: bool


class SolutionListModel(BaseModel):
    schema_: str = Field(default="lsa/1", alias="schema")
    kind: Literal["solution-list"] = "solution-list"
    query: dict[str, Any]
    optimal_residual: float
    finite: bool
    support_count: int
    restricted_counts: dict[str, int]
    solutions: list[SolutionModel]

    model_config = {"populate_by_name": True}


class BoundsRequest(BaseModel):
    name: str
    mu: float | None = None
    mu_k: float | None = None
    k: int | None = None
    eps: float | None = None
    gamma: float | None = None
    delta: float | None = None
    n: int | None = None
    spark: int | Literal["infinite"] | None = None


class BoundsResponse(BaseModel):
    name: str
    value: int | float | Literal["not_applicable"] | dict[str, Any]
    inputs: dict[str, Any]


class VerifyRequest(BaseModel):
    suite: str
    seed: int = 0
    budget: int | None = None


class BoundReportModel(BaseModel):
    bound: str
    inputs: dict[str, Any]
    precondition_holds: bool
    bound_value: int | float | Literal["not_applicable"]
    measured: int | None
    violated: bool


class VerifyResponse(BaseModel):
    schema_: str = Field(default="lsa/1", alias="schema")
    kind: Literal["bound-reports"] = "bound-reports"
    suite: str
    seed: int
    violations: int
    reports: list[BoundReportModel]

    model_config = {"populate_by_name": True}


class CompressRequest(BaseModel):
    pixels: list[list[float]]
    class_label: Literal[1, 2, 3] = Field(alias="class")
    keep: float = 0.20
    depth: int = 4
    seed: int = 0
    large_threshold: float = 1e-1
    medium_threshold: float = 1e-2
    medium_keep_prob: float = 0.5

    model_config = {"populate_by_name": True}


class CompressResponse(BaseModel):
    stats: dict[str, Any]
    pixels: list[list[float]]


class ErrorResponse(BaseModel):
    error: str
    detail: str
