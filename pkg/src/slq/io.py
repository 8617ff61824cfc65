"""JSON file formats for problems, spectral data, and reports.

Matrices are stored as row-major nested lists of [re, im] pairs.  Floats are
written with 17 significant digits so a load/dump cycle is lossless and
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .core import HERM_TOL, ProblemSpec, SigmaFunction, SpectralDataSet, \
    _check_projector
from .errors import ValidationError


def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[z.real, z.imag] for z in row] for row in a]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(p[0], p[1]) for p in row] for row in rows])


def _fmt(value) -> str:
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"non-finite float {value!r} in JSON output")
        return "%.17g" % value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"unsupported JSON scalar {type(value)}")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON text: sorted keys, fixed float format."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {dumps(obj[k], indent + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        flat = all(not isinstance(v, (dict, list, tuple)) for v in seq)
        if flat:
            return "[" + ", ".join(_fmt(v) for v in seq) + "]"
        parts = [f"{inner}{dumps(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _fmt(obj)


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj) + "\n")


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# sigma


def sigma_to_dict(sigma: SigmaFunction) -> dict:
    kind = sigma.kind
    if kind == "zero":
        return {"kind": "zero", "m": sigma.m}
    if kind == "constant":
        return {"kind": "constant", "value": encode_matrix(sigma.value)}
    if kind == "trig":
        return {"kind": "trig", "coeffs": [encode_matrix(c) for c in sigma.coeffs]}
    if kind == "grid":
        return {"kind": "grid", "x": [float(v) for v in sigma.x],
                "values": [encode_matrix(v) for v in sigma.values]}
    raise ValidationError(f"sigma kind {kind!r} has no file representation")


def sigma_from_dict(d: dict) -> SigmaFunction:
    kind = d.get("kind")
    if kind == "zero":
        return SigmaFunction.zero(int(d["m"]))
    if kind == "constant":
        return SigmaFunction.constant(decode_matrix(d["value"]))
    if kind == "trig":
        return SigmaFunction.trig([decode_matrix(c) for c in d["coeffs"]])
    if kind == "grid":
        return SigmaFunction.grid(np.asarray(d["x"], dtype=float),
                                  np.stack([decode_matrix(v) for v in d["values"]]))
    raise ValidationError(f"unknown sigma kind {kind!r}")


# ---------------------------------------------------------------------------
# problem / boundary structure


def problem_to_dict(spec: ProblemSpec) -> dict:
    return {
        "m": spec.m,
        "T1": encode_matrix(spec.T1),
        "T2": encode_matrix(spec.T2),
        "H2": encode_matrix(spec.H2),
        "sigma": sigma_to_dict(spec.sigma),
    }


def problem_from_dict(d: dict) -> ProblemSpec:
    return ProblemSpec(m=int(d["m"]), T1=decode_matrix(d["T1"]),
                       T2=decode_matrix(d["T2"]), H2=decode_matrix(d["H2"]),
                       sigma=sigma_from_dict(d["sigma"]))


def bc_from_dict(d: dict) -> tuple[np.ndarray, np.ndarray]:
    """Boundary structure file: {"m", "T1", "T2"}.

    T1 and T2 must be orthoprojectors; everything downstream of a --bc file
    assumes that, so it is enforced at load time.
    """
    T1 = decode_matrix(d["T1"])
    T2 = decode_matrix(d["T2"])
    m = int(d.get("m", T1.shape[0]))
    for T, name in ((T1, "T1"), (T2, "T2")):
        if T.shape != (m, m):
            raise ValidationError(f"{name} must be {m}x{m}, got {T.shape}")
        _check_projector(T, name, HERM_TOL)
    return T1, T2


# ---------------------------------------------------------------------------
# spectral data


def dataset_to_dict(data: SpectralDataSet) -> dict:
    return {
        "m": data.m,
        "shift": float(data.shift),
        "entries": [
            {"n": e.n, "k": e.k, "lam": float(e.lam),
             "multiplicity": e.multiplicity,
             "alpha": encode_matrix(e.alpha)}
            for e in data.entries
        ],
    }


def dataset_from_dict(d: dict, cluster_tol: float = 1e-8) -> SpectralDataSet:
    items = [(int(e["n"]), int(e["k"]), float(e["lam"]), decode_matrix(e["alpha"]))
             for e in d["entries"]]
    return SpectralDataSet.build(int(d["m"]), items,
                                 shift=float(d.get("shift", 0.0)),
                                 cluster_tol=cluster_tol)
