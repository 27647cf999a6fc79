"""JSON file formats: tuples, constraint systems, paths and tolerance configs.

Matrices are row-major nested lists of ``[re, im]`` pairs.  ``json`` writes
floats with ``repr``, the shortest decimal that round-trips, so every format
reloads bit-exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BadParameterError, IOFailure
from .linalg import ToleranceConfig
from .paths import BoundCheck, ConjugationSegment, LinearSegment, MatrixPath
from .tuples import MatrixTuple, MultiPoly, MultiPolySystem, ZeroSet, validate_zero_set


def _pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _unpair(p) -> complex:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise BadParameterError(f"expected a [re, im] pair, got {p!r}")
    return complex(float(p[0]), float(p[1]))


def encode_matrix(A: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A, dtype=complex)]


def decode_matrix(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadParameterError(f"malformed matrix: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise BadParameterError("matrix must be a 2-d array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_tuple(X: MatrixTuple) -> dict:
    return {"m": X.m, "n": X.n, "matrices": [encode_matrix(A) for A in X]}


def decode_tuple(doc: dict) -> MatrixTuple:
    try:
        m, n, mats = int(doc["m"]), int(doc["n"]), doc["matrices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadParameterError(f"malformed tuple document: {exc}") from exc
    X = MatrixTuple(decode_matrix(A) for A in mats)
    if X.m != m or X.n != n:
        raise BadParameterError(f"tuple header says m={m}, n={n} but data has m={X.m}, n={X.n}")
    return X


def encode_system(P: MultiPolySystem, Z: ZeroSet | None = None) -> dict:
    doc = {
        "variables": P.m,
        "polys": [
            {"monomials": [{"exps": list(e), "coeff": _pair(c)} for e, c in sorted(p.terms.items())]}
            for p in P.polys
        ],
    }
    if Z is not None:
        doc["zero_set"] = [[_pair(z) for z in row] for row in Z.points]
    return doc


def decode_system(doc: dict, tol: ToleranceConfig) -> tuple[MultiPolySystem, ZeroSet | None]:
    """Parse a constraint document; the zero set, when present, is validated."""
    try:
        m = int(doc["variables"])
        polys = tuple(
            MultiPoly(m, {tuple(mono["exps"]): _unpair(mono["coeff"]) for mono in p["monomials"]})
            for p in doc["polys"]
        )
    except (KeyError, TypeError) as exc:
        raise BadParameterError(f"malformed constraint document: {exc}") from exc
    P = MultiPolySystem(m, polys)
    if "zero_set" not in doc:
        return P, None
    pts = [[_unpair(z) for z in row] for row in doc["zero_set"]]
    return P, validate_zero_set(P, pts, tol)


def encode_path(path: MatrixPath) -> dict:
    segs = []
    for seg in path.segments:
        if isinstance(seg, LinearSegment):
            segs.append({"kind": "linear", "start": encode_tuple(seg.start), "end": encode_tuple(seg.end)})
        else:
            segs.append(
                {"kind": "conjugation", "base": encode_tuple(seg.base), "K": encode_matrix(seg.K), "a": seg.a, "b": seg.b}
            )
    return {
        "knots": [float(k) for k in path.knots],
        "segments": segs,
        "bound_checks": [b.to_dict() for b in path.bound_checks],
    }


def decode_path(doc: dict, tol: ToleranceConfig) -> MatrixPath:
    try:
        segs = []
        for s in doc["segments"]:
            if s["kind"] == "linear":
                segs.append(LinearSegment(decode_tuple(s["start"]), decode_tuple(s["end"])))
            elif s["kind"] == "conjugation":
                segs.append(ConjugationSegment(decode_tuple(s["base"]), decode_matrix(s["K"]), s["a"], s["b"], tol))
            else:
                raise BadParameterError(f"unknown segment kind {s['kind']!r}")
        checks = [
            BoundCheck(b["name"], b["claimed_constant"], b["measured_ratio"], b["pass"])
            for b in doc.get("bound_checks", [])
        ]
        knots = doc.get("knots")
    except (KeyError, TypeError) as exc:
        raise BadParameterError(f"malformed path document: {exc}") from exc
    return MatrixPath(segs, knots, checks, tol=tol)


def decode_tolerances(doc: dict) -> ToleranceConfig:
    try:
        return ToleranceConfig(**{k: float(v) for k, v in doc.items()})
    except TypeError as exc:
        raise BadParameterError(f"unknown tolerance field: {exc}") from exc


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise BadParameterError(f"{path} is not valid JSON: {exc}") from exc


def write_json(path, doc) -> None:
    try:
        Path(path).write_text(json.dumps(doc, allow_nan=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from exc


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from exc


def load_tuple(path) -> MatrixTuple:
    return decode_tuple(read_json(path))


def save_tuple(path, X: MatrixTuple) -> None:
    write_json(path, encode_tuple(X))
