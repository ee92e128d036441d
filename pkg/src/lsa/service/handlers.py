"""Request -> response functions shared by the HTTP endpoints and the CLI.

Every piece of behavior lives here; the FastAPI app and the CLI are both
thin shells over these handlers, so in-process and over-the-wire calls
cannot drift apart.
"""

from __future__ import annotations

import numpy as np

from .. import bounds as bounds_mod
from .. import constructions, core, formats, solvers, waveletlab
from ..errors import InputError
from . import models


def _dictionary(payload: models.DictionaryPayload) -> core.Dictionary:
    return formats.dictionary_from_dict(payload.model_dump(by_alias=True))


def _target(payload: models.TargetPayload) -> np.ndarray:
    return formats.vector_from_jsonable(payload.values)


def analyze(req: models.AnalyzeRequest) -> models.InvariantReportModel:
    D = _dictionary(req.dictionary)
    kwargs = {}
    if req.rank_tol is not None:
        kwargs["rank_tol"] = req.rank_tol
    report = core.invariant_report(D, k_max=req.k, budget=req.budget, **kwargs)
    return models.InvariantReportModel(**formats.invariant_report_to_dict(report))


def construct(req: models.ConstructRequest) -> models.ConstructResponse:
    bundle = constructions.build(req.name, **req.params)
    return models.ConstructResponse(
        name=bundle.name,
        dictionary=models.DictionaryPayload(
            **formats.dictionary_to_dict(bundle.dictionary)
        ),
        targets=[
            models.TargetPayload(label=label, values=formats.vector_to_jsonable(v))
            for label, v in bundle.targets
        ],
        predicted=_jsonable(bundle.predicted),
        parameters=_jsonable(bundle.parameters),
    )


def _jsonable(d: dict) -> dict:
    out = {}
    for key, value in d.items():
        if isinstance(value, np.ndarray):
            out[key] = formats.vector_to_jsonable(value)
        elif isinstance(value, (np.integer,)):
            out[key] = int(value)
        elif isinstance(value, (np.floating,)):
            out[key] = float(value)
        else:
            out[key] = value
    return out


def solve(req: models.SolveRequest) -> models.SolutionListModel:
    D = _dictionary(req.dictionary)
    b = _target(req.target)
    kwargs = {"budget": req.budget}
    if req.problem == "sparse":
        if req.eq_tol is not None:
            kwargs["eq_tol"] = req.eq_tol
        sol = solvers.solve_list_sparse(D, b, req.k, **kwargs)
    else:
        if req.eps is None:
            raise InputError("approx solve needs eps")
        if req.eq_tol is not None:
            kwargs["tol"] = req.eq_tol
        sol = solvers.solve_list_approx(D, b, req.k, req.eps, mode=req.mode, **kwargs)
    if req.restrict is not None:
        packed = solvers.restricted_list_size(sol.supports, req.restrict, budget=req.budget)
        sol = solvers.SolutionList(
            query=sol.query,
            solutions=sol.solutions,
            optimal_residual=sol.optimal_residual,
            finite=sol.finite,
            support_count=sol.support_count,
            restricted_counts={**sol.restricted_counts, req.restrict: packed},
        )
    return models.SolutionListModel(**formats.solution_list_to_dict(sol))


def evaluate_bound(req: models.BoundsRequest) -> models.BoundsResponse:
    """Dispatch one closed-form bound by name."""
    name = req.name

    def need(*fields):
        missing = [f for f in fields if getattr(req, f) is None]
        if missing:
            raise InputError(f"bound {name!r} needs {missing}")
        return [getattr(req, f) for f in fields]

    if name == "simplex-radius":
        (n,) = need("n")
        value = bounds_mod.simplex_circumradius(int(n))
        inputs = {"n": n}
    elif name == "euclidean":
        delta, eps = need("delta", "eps")
        value = bounds_mod.euclidean_list_bound(delta, eps)
        inputs = {"delta": delta, "eps": eps}
    elif name == "spherical":
        mu, eps = need("mu", "eps")
        value = bounds_mod.spherical_list_bound(mu, eps)
        inputs = {"mu": mu, "eps": eps}
    elif name == "mu-k":
        mu_k, eps = need("mu_k", "eps")
        value = bounds_mod.list_bound_mu_k(mu_k, eps)
        inputs = {"mu_k": mu_k, "eps": eps}
    elif name == "coherence-k":
        mu, k, eps = need("mu", "k", "eps")
        value = bounds_mod.list_bound_coherence(mu, int(k), eps)
        inputs = {"mu": mu, "k": k, "eps": eps}
    elif name == "av-k1":
        mu, eps = need("mu", "eps")
        value = bounds_mod.av_list_bound_k1(mu, eps)
        inputs = {"mu": mu, "eps": eps}
    elif name == "av-k":
        mu, k, eps, gamma = need("mu", "k", "eps", "gamma")
        value = bounds_mod.av_list_bound(mu, int(k), eps, gamma)
        inputs = {"mu": mu, "k": k, "eps": eps, "gamma": gamma}
    elif name == "mu-k-upper":
        mu, k = need("mu", "k")
        value = bounds_mod.mu_k_upper(mu, int(k))
        inputs = {"mu": mu, "k": k}
    elif name == "mu-k-upper-simple":
        mu, k = need("mu", "k")
        value = bounds_mod.mu_k_upper_simple(mu, int(k))
        inputs = {"mu": mu, "k": k}
    elif name == "uniqueness":
        mu, k = need("mu", "k")
        spark_value = core.INFINITE if req.spark in (None, "infinite") else int(req.spark)
        flags = bounds_mod.uniqueness_thresholds(mu, spark_value, int(k))
        value = {
            "unique_by_mu": flags.unique_by_mu,
            "unique_by_spark": flags.unique_by_spark,
            "two_onb_cohbound": flags.two_onb_cohbound,
        }
        inputs = {"mu": mu, "k": k, "spark": req.spark}
    else:
        raise InputError(
            f"unknown bound {name!r}; choose from simplex-radius, euclidean, spherical, "
            "mu-k, coherence-k, av-k1, av-k, mu-k-upper, mu-k-upper-simple, uniqueness"
        )
    if value is bounds_mod.NOT_APPLICABLE:
        value = "not_applicable"
    return models.BoundsResponse(name=name, value=value, inputs=inputs)


def verify(req: models.VerifyRequest) -> models.VerifyResponse:
    result = bounds_mod.run_suite(req.suite, req.seed, budget=req.budget)
    doc = formats.bound_reports_to_dict(result.reports, suite=req.suite, seed=req.seed)
    return models.VerifyResponse(**doc)


def compress(req: models.CompressRequest) -> models.CompressResponse:
    image = waveletlab.image_grid(req.pixels)
    result = waveletlab.compress_class(
        image,
        req.class_label,
        depth=req.depth,
        keep_fraction=req.keep,
        large_threshold=req.large_threshold,
        medium_threshold=req.medium_threshold,
        medium_keep_prob=req.medium_keep_prob,
        seed=req.seed,
    )
    blocks = {node: np.zeros((image.side >> node[0],) * 2) for node in result.selection.nodes}
    for (level, pos, idx), value in result.kept.items():
        blocks[(level, pos)].reshape(-1)[idx] = value
    recon = waveletlab.reconstruct(result.selection, blocks, image.side, req.depth)
    recon = np.clip(recon, 0.0, 1.0)
    return models.CompressResponse(
        stats=formats.compression_stats_to_dict(result),
        pixels=[[float(v) for v in row] for row in recon],
    )
