"""Command-line client for the lsa service.

Every command builds the same pydantic request the HTTP API consumes and
dispatches it either in-process (the default -- no server or network
needed) or, with --server URL, against a running `lsa serve` instance.
The CLI itself only does file I/O and dispatch; all behavior lives in
lsa.service.handlers.

Exit codes: 0 success, 2 invalid input, 3 enumeration budget exceeded,
4 bound violation detected by `verify`.  The optional LSA_BUDGET
environment variable caps enumeration sizes for every command.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import default_budget
from .errors import BudgetExceeded, InputError, LsaError
from .service import handlers, models

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_VIOLATION = 4

_ROUTES = {
    models.AnalyzeRequest: ("/v1/analyze", handlers.analyze, models.InvariantReportModel),
    models.ConstructRequest: ("/v1/construct", handlers.construct, models.ConstructResponse),
    models.SolveRequest: ("/v1/solve", handlers.solve, models.SolutionListModel),
    models.BoundsRequest: ("/v1/bounds", handlers.evaluate_bound, models.BoundsResponse),
    models.VerifyRequest: ("/v1/verify", handlers.verify, models.VerifyResponse),
    models.CompressRequest: ("/v1/compress", handlers.compress, models.CompressResponse),
}


class _RemoteError(Exception):
    def __init__(self, exit_code: int, detail: str):
        super().__init__(detail)
        self.exit_code = exit_code


def _dispatch(request, server: str | None):
    path, handler, response_model = _ROUTES[type(request)]
    if server is None:
        return handler(request)
    import httpx

    reply = httpx.post(
        server.rstrip("/") + path,
        json=request.model_dump(by_alias=True, mode="json"),
        timeout=600.0,
    )
    if reply.status_code >= 400:
        body = reply.json() if "json" in reply.headers.get("content-type", "") else {}
        kind = body.get("error", "")
        code = EXIT_BUDGET if "Budget" in kind or "Witness" in kind else EXIT_INPUT
        raise _RemoteError(code, body.get("detail", reply.text))
    return response_model.model_validate(reply.json())


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _load_dictionary_payload(path: str) -> models.DictionaryPayload:
    from . import formats

    return models.DictionaryPayload(**formats.load_json(path))


def _load_target_payload(path: str, label: str | None) -> models.TargetPayload:
    from . import formats

    doc = formats.load_json(path)
    targets = formats.targets_from_dict(doc)
    if label is None:
        name, vec = targets[0]
    else:
        match = [t for t in targets if t[0] == label]
        if not match:
            raise InputError(f"{path}: no target labeled {label!r}")
        name, vec = match[0]
    return models.TargetPayload(label=name, values=formats.vector_to_jsonable(vec))


def _cmd_analyze(args) -> int:
    req = models.AnalyzeRequest(
        dictionary=_load_dictionary_payload(args.dict),
        k=args.k,
        rank_tol=args.tol,
        budget=args.budget,
    )
    report = _dispatch(req, args.server)
    _write_or_print(report.model_dump_json(by_alias=True, indent=2), args.output)
    return EXIT_OK


def _cmd_construct(args) -> int:
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise InputError(f"--param expects name=value, got {item!r}")
        key, value = item.split("=", 1)
        params[key] = float(value)
    req = models.ConstructRequest(name=args.name, params=params)
    bundle = _dispatch(req, args.server)

    from . import formats

    formats.dump_json(bundle.dictionary.model_dump(by_alias=True), args.output)
    targets_path = args.targets or str(Path(args.output).with_suffix("")) + ".targets.json"
    formats.dump_json(
        {
            "schema": "lsa/1",
            "targets": [t.model_dump() for t in bundle.targets],
        },
        targets_path,
    )
    print(f"wrote {args.output} and {targets_path}")
    if args.show_predicted:
        import json

        print(json.dumps(bundle.predicted, indent=2, default=str))
    return EXIT_OK


def _cmd_solve(args) -> int:
    mode = "minimal-supports" if args.mode == "minimal" else args.mode
    req = models.SolveRequest(
        dictionary=_load_dictionary_payload(args.dict),
        target=_load_target_payload(args.target, args.label),
        problem=args.problem,
        k=args.k,
        eps=args.eps,
        mode=mode,
        restrict=args.restrict,
        budget=args.budget,
    )
    if args.problem == "approx" and args.eps is None:
        raise InputError("solve approx needs --eps")
    sol = _dispatch(req, args.server)
    _write_or_print(sol.model_dump_json(by_alias=True, indent=2), args.output)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    req = models.BoundsRequest(
        name=args.name,
        mu=args.mu,
        mu_k=args.mu_k,
        k=args.k,
        eps=args.eps,
        gamma=args.gamma,
        delta=args.delta,
        n=args.n,
        spark=args.spark,
    )
    result = _dispatch(req, args.server)
    _write_or_print(result.model_dump_json(indent=2), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    req = models.VerifyRequest(suite=args.suite, seed=args.seed, budget=args.budget)
    result = _dispatch(req, args.server)
    if args.csv:
        from . import bounds as bounds_mod
        from . import formats

        reports = [
            bounds_mod.BoundReport(
                bound_name=r.bound,
                inputs=r.inputs,
                precondition_holds=r.precondition_holds,
                bound_value=None if r.bound_value == "not_applicable" else r.bound_value,
                measured=r.measured,
                violated=r.violated,
            )
            for r in result.reports
        ]
        _write_or_print(formats.bound_reports_to_csv(reports).rstrip("\n"), args.output)
    else:
        _write_or_print(result.model_dump_json(by_alias=True, indent=2), args.output)
    if result.violations:
        print(f"{result.violations} bound violation(s) detected", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_compress(args) -> int:
    from . import formats, waveletlab

    image = formats.read_pgm(args.image)
    req = models.CompressRequest(
        pixels=[[float(v) for v in row] for row in image.pixels],
        **{"class": args.class_label},
        keep=args.keep,
        depth=args.depth,
        seed=args.seed,
        large_threshold=args.large,
        medium_threshold=args.medium,
        medium_keep_prob=args.medium_prob,
    )
    result = _dispatch(req, args.server)
    if args.output:
        import numpy as np

        recon = waveletlab.image_grid(np.array(result.pixels))
        formats.write_pgm(recon, args.output, binary=not args.ascii)
    if args.stats:
        formats.dump_json(result.stats, args.stats)
    if not args.output and not args.stats:
        print(formats.dump_json(result.stats))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsa",
        description="Sparse-approximation list analysis: invariants, solvers, "
        "constructions, bounds, and wavelet-packet compression.",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running `lsa serve` instance; default runs in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="coherence, spark, mu_1..mu_K, rank of a dictionary")
    p.add_argument("--dict", required=True, help="dictionary JSON file")
    p.add_argument("--k", type=int, default=1, help="largest generalized-coherence degree")
    p.add_argument("--tol", type=float, default=None, help="relative rank tolerance")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("construct", help="generate a named dictionary + targets")
    p.add_argument("name", help="identity-bad-b | tight-example | spikes-sines | "
                   "picket-solutions | kerdock | kerdock-solutions | mu-k-tight | equiangular-2d")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="construction parameter, repeatable (e.g. --param m=5 --param k=2)")
    p.add_argument("-o", "--output", required=True, help="dictionary JSON output path")
    p.add_argument("--targets", default=None, help="targets JSON path (default <output>.targets.json)")
    p.add_argument("--show-predicted", action="store_true")
    p.set_defaults(fn=_cmd_construct)

    p = sub.add_parser("solve", help="exhaustive list-sparse / list-approx enumeration")
    p.add_argument("problem", choices=("sparse", "approx"))
    p.add_argument("--dict", required=True)
    p.add_argument("--target", required=True, help="targets JSON file")
    p.add_argument("--label", default=None, help="target label (default: first)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--mode", choices=("exact-size", "minimal"), default="exact-size")
    p.add_argument("--restrict", type=int, default=None,
                   help="also report the R-restricted list size for this R")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("bounds", help="evaluate one closed-form list-size bound")
    p.add_argument("name", help="simplex-radius | euclidean | spherical | mu-k | coherence-k | "
                   "av-k1 | av-k | mu-k-upper | mu-k-upper-simple | uniqueness")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--mu-k", type=float, default=None, dest="mu_k")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--spark", default=None, help="integer or 'infinite'")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_bounds)

    p = sub.add_parser("verify", help="run a bound-soundness suite; exit 4 on violation")
    p.add_argument("--suite", required=True,
                   help="identity | tight-example | spikes | kerdock | random")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("compress", help="wavelet-packet compression of a PGM image")
    p.add_argument("--image", required=True, help="input PGM (P2 or P5)")
    p.add_argument("--class", dest="class_label", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--keep", type=float, default=0.20)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--large", type=float, default=1e-1, help="class-1 large threshold")
    p.add_argument("--medium", type=float, default=1e-2, help="class-1 medium threshold")
    p.add_argument("--medium-prob", type=float, default=0.5, dest="medium_prob")
    p.add_argument("--ascii", action="store_true", help="write P2 instead of P5")
    p.add_argument("-o", "--output", default=None, help="reconstructed PGM path")
    p.add_argument("--stats", default=None, help="stats JSON path")
    p.set_defaults(fn=_cmd_compress)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "budget"):
        args.budget = None
    if args.budget is None:
        args.budget = default_budget()
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, LsaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
