"""FastAPI application exposing the library over HTTP.

Error mapping: invalid domain input (bad dictionary, bad parameters)
returns 400; an enumeration that hits its budget returns 422 with the
budget message.  Payload-shape problems are FastAPI's usual 422
validation errors.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import BudgetExceeded, InputError, LsaError
from . import handlers, models

app = FastAPI(
    title="lsa",
    description=(
        "Combinatorial invariants of redundant dictionaries, exhaustive "
        "list-sparse/list-approx solvers, worst-case constructions, "
        "closed-form bound checks, and Haar wavelet-packet compression."
    ),
    version="0.1.0",
)


@app.exception_handler(LsaError)
async def _domain_error(request: Request, exc: LsaError) -> JSONResponse:
    if isinstance(exc, BudgetExceeded):
        status = 422
    elif isinstance(exc, InputError):
        status = 400
    else:
        status = 500
    return JSONResponse(
        status_code=status,
        content=models.ErrorResponse(error=type(exc).__name__, detail=str(exc)).model_dump(),
    )


@app.get("/v1/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/v1/analyze", response_model=models.InvariantReportModel)
def analyze(req: models.AnalyzeRequest):
    return handlers.analyze(req)


@app.post("/v1/construct", response_model=models.ConstructResponse)
def construct(req: models.ConstructRequest):
    return handlers.construct(req)


@app.post("/v1/solve", response_model=models.SolutionListModel)
def solve(req: models.SolveRequest):
    return handlers.solve(req)


@app.post("/v1/bounds", response_model=models.BoundsResponse)
def bounds(req: models.BoundsRequest):
    return handlers.evaluate_bound(req)


@app.post("/v1/verify", response_model=models.VerifyResponse)
def verify(req: models.VerifyRequest):
    return handlers.verify(req)


@app.post("/v1/compress", response_model=models.CompressResponse)
def compress(req: models.CompressRequest):
    return handlers.compress(req)
