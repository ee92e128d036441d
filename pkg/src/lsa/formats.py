"""File formats: dictionary/target JSON, report JSON/CSV, and PGM images.

All JSON documents carry "schema": "lsa/1".  Floats are serialized with
Python's shortest-round-trip repr (at most 17 significant digits), so
parse -> serialize is value-identical; complex entries are [re, im]
pairs.  The PGM reader accepts both ASCII (P2) and binary (P5) 8-bit
files; the writer emits a canonical header so write -> read -> write is
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .bounds import BoundReport
from .core import INFINITE, Dictionary, InvariantReport, new_dictionary
from .errors import InputError
from .solvers import SolutionList
from .waveletlab import CompressionResult, ImageGrid, image_grid

SCHEMA = "lsa/1"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InputError(msg)


# -- dictionary files ----------------------------------------------------------

def dictionary_to_dict(D: Dictionary) -> dict:
    is_complex = not D.is_real
    cols = []
    for j in range(D.n_atoms):
        col = D.entries[:, j]
        if is_complex:
            cols.append([[float(v.real), float(v.imag)] for v in col])
        else:
            cols.append([float(v.real) for v in col])
    return {
        "schema": SCHEMA,
        "m": D.m,
        "n": D.n_atoms,
        "complex": is_complex,
        "columns": cols,
    }


def dictionary_from_dict(doc: dict, tol: float | None = None) -> Dictionary:
    _require(isinstance(doc, dict), "dictionary file must be a JSON object")
    for key in ("m", "n", "columns"):
        _require(key in doc, f"dictionary file missing key {key!r}")
    m, n = int(doc["m"]), int(doc["n"])
    cols = doc["columns"]
    _require(isinstance(cols, list) and len(cols) == n, f"expected {n} columns")
    is_complex = bool(doc.get("complex", False))
    A = np.zeros((m, n), dtype=np.complex128)
    for j, col in enumerate(cols):
        _require(isinstance(col, list) and len(col) == m, f"column {j} must have {m} entries")
        if is_complex:
            for i, pair in enumerate(col):
                _require(
                    isinstance(pair, list) and len(pair) == 2,
                    f"complex entries are [re, im] pairs (column {j})",
                )
                A[i, j] = complex(float(pair[0]), float(pair[1]))
        else:
            A[:, j] = np.asarray([float(v) for v in col])
    kwargs = {"tol": tol} if tol is not None else {}
    return new_dictionary(A, **kwargs)


def vector_to_jsonable(v: np.ndarray) -> list:
    v = np.asarray(v)
    if np.any(np.iscomplex(v)):
        return [[float(x.real), float(x.imag)] for x in v]
    return [float(x.real) for x in v]


def vector_from_jsonable(values) -> np.ndarray:
    _require(isinstance(values, list) and values, "vector must be a non-empty list")
    if isinstance(values[0], list):
        return np.array([complex(float(p[0]), float(p[1])) for p in values])
    return np.array([float(v) for v in values], dtype=np.complex128)


def targets_to_dict(labeled_vectors) -> dict:
    return {
        "schema": SCHEMA,
        "targets": [
            {"label": label, "values": vector_to_jsonable(v)} for label, v in labeled_vectors
        ],
    }


def targets_from_dict(doc: dict) -> list[tuple[str, np.ndarray]]:
    _require(isinstance(doc, dict) and "targets" in doc, "targets file missing 'targets'")
    out = []
    for t in doc["targets"]:
        _require("label" in t and "values" in t, "each target needs 'label' and 'values'")
        out.append((str(t["label"]), vector_from_jsonable(t["values"])))
    _require(bool(out), "targets file has no targets")
    return out


# -- reports ---------------------------------------------------------------------

def _spark_jsonable(s) -> int | str:
    return "infinite" if s == INFINITE or s == math.inf else int(s)


def invariant_report_to_dict(r: InvariantReport) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "invariants",
        "coherence": r.coherence,
        "spark": _spark_jsonable(r.spark),
        "generalized_coherence": {str(k): v for k, v in sorted(r.generalized_coherence.items())},
        "rank": r.rank,
        "rank_tol": r.rank_tol,
        "column_norm_tol": r.column_norm_tol,
    }


def solution_list_to_dict(sol: SolutionList) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "solution-list",
        "query": {
            "k": sol.query.k,
            "eps": sol.query.eps if sol.query.eps is not None else "optimal",
        },
        "optimal_residual": sol.optimal_residual,
        "finite": sol.finite,
        "support_count": sol.support_count,
        "restricted_counts": {str(r): c for r, c in sorted(sol.restricted_counts.items())},
        "solutions": [
            {
                "support": list(s.support),
                "coefficients": vector_to_jsonable(s.coefficients),
                "residual": s.residual,
                "coeffs_unique": s.coeffs_unique,
            }
            for s in sol.solutions
        ],
    }


def bound_report_to_dict(r: BoundReport) -> dict:
    return {
        "bound": r.bound_name,
        "inputs": r.inputs,
        "precondition_holds": r.precondition_holds,
        "bound_value": r.bound_value if r.bound_value is not None else "not_applicable",
        "measured": r.measured,
        "violated": r.violated,
    }


def bound_reports_to_dict(reports, suite: str | None = None, seed: int | None = None) -> dict:
    doc = {
        "schema": SCHEMA,
        "kind": "bound-reports",
        "violations": sum(1 for r in reports if r.violated),
        "reports": [bound_report_to_dict(r) for r in reports],
    }
    if suite is not None:
        doc["suite"] = suite
    if seed is not None:
        doc["seed"] = seed
    return doc


_CSV_FIELDS = ("bound", "precondition_holds", "bound_value", "measured", "violated", "inputs")


def bound_reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(
            {
                "bound": r.bound_name,
                "precondition_holds": r.precondition_holds,
                "bound_value": "not_applicable" if r.bound_value is None else r.bound_value,
                "measured": r.measured,
                "violated": r.violated,
                "inputs": json.dumps(r.inputs, sort_keys=True),
            }
        )
    return buf.getvalue()


def compression_stats_to_dict(res: CompressionResult) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "compression-stats",
        "class": res.class_label,
        "sparsity_fraction": res.sparsity_fraction,
        "relative_error": res.relative_error,
        "kept_count": len(res.kept),
        "basis_nodes": [list(n) for n in res.selection.nodes],
        "parameters": res.parameters,
    }


def dump_json(doc: dict, path=None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=False)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc


# -- PGM -------------------------------------------------------------------------

def read_pgm(path) -> ImageGrid:
    """Read an 8-bit P2 or P5 PGM into an ImageGrid (values scaled by maxval)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return _parse_pgm(data, str(path))


def _parse_pgm(data: bytes, origin: str) -> ImageGrid:
    if data[:2] not in (b"P2", b"P5"):
        raise InputError(f"{origin}: not a PGM file (magic {data[:2]!r})")
    binary = data[:2] == b"P5"

    # header tokens, skipping '#' comments
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(data):
            raise InputError(f"{origin}: truncated PGM header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise InputError(f"{origin}: bad PGM header {tokens!r}") from exc
    if not 0 < maxval < 256:
        raise InputError(f"{origin}: only 8-bit PGM supported, maxval={maxval}")

    if binary:
        pos += 1  # single whitespace after maxval
        raster = data[pos : pos + width * height]
        if len(raster) != width * height:
            raise InputError(f"{origin}: truncated P5 raster")
        values = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    else:
        fields = data[pos:].split()
        if len(fields) != width * height:
            raise InputError(
                f"{origin}: expected {width * height} P2 samples, got {len(fields)}"
            )
        values = np.array([int(f) for f in fields], dtype=np.float64)
    if values.max(initial=0) > maxval:
        raise InputError(f"{origin}: sample exceeds maxval {maxval}")
    pixels = values.reshape(height, width) / maxval
    return image_grid(pixels)


def write_pgm(image: ImageGrid, path, binary: bool = True) -> None:
    """Write an 8-bit PGM (P5 by default, P2 with binary=False)."""
    side = image.side
    samples = np.clip(np.rint(image.pixels * 255.0), 0, 255).astype(np.uint8)
    header = f"{'P5' if binary else 'P2'}\n{side} {side}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            fh.write(samples.tobytes())
        else:
            body = "\n".join(" ".join(str(v) for v in row) for row in samples)
            fh.write(body.encode("ascii") + b"\n")
