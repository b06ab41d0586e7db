"""Problem and result files.

Both are UTF-8 JSON documents with a ``format_version`` field. The canonical
form (what :func:`dumps` writes) has sorted keys, two-space indentation and
shortest round-trip float literals (at most 17 significant digits), so
``dumps(parse(text))`` is stable under repetition. See ``docs/file_format.md``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from invkit.exceptions import InvkitError
from invkit.geometry import HPolytope
from invkit.system import OutputSpec, UncertainSystem

FORMAT_VERSION = 1

TOLERANCE_KEYS = {
    "eps_red": float,
    "eps_add": float,
    "eps_sub": float,
    "mrpi_tol": float,
    "max_passes": int,
    "mrpi_iterations": int,
    "vertex_cap": int,
    "row_cap": int,
}


class ProblemFormatError(InvkitError, ValueError):
    pass


def _matrix(data, key, rows=None, cols=None, allow_empty=False):
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"field '{key}': not a numeric array ({exc})") from None
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, cols or 0)
    if a.ndim != 2:
        raise ProblemFormatError(f"field '{key}': expected a 2-D array, got {a.ndim}-D")
    if a.shape[0] == 0 and not allow_empty:
        raise ProblemFormatError(f"field '{key}': needs at least one row")
    if rows is not None and a.shape[0] != rows:
        raise ProblemFormatError(f"field '{key}': expected {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[0] and a.shape[1] != cols:
        raise ProblemFormatError(f"field '{key}': expected {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ProblemFormatError(f"field '{key}': non-finite entries")
    return a


def _vector(data, key, size):
    try:
        a = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"field '{key}': not a numeric array ({exc})") from None
    if a.ndim != 1 or a.size != size:
        raise ProblemFormatError(f"field '{key}': expected a vector of length {size}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ProblemFormatError(f"field '{key}': non-finite entries")
    if np.any(a < 0):
        raise ProblemFormatError(f"field '{key}': negative offsets, the set must contain the origin")
    return a


def _require(d, key):
    if key not in d:
        raise ProblemFormatError(f"missing field '{key}'")
    return d[key]


@dataclass
class ProblemFile:
    n: int
    m: int
    F_x: np.ndarray
    f_x: np.ndarray
    F_u: np.ndarray
    f_u: np.ndarray
    F_d: np.ndarray
    f_d: np.ndarray
    psi_vertices: list
    K: np.ndarray
    output_spec: Optional[dict] = None
    tolerances: dict = field(default_factory=dict)

    def to_system(self) -> UncertainSystem:
        return UncertainSystem(self.n, self.m, self.F_x, self.f_x, self.F_u, self.f_u,
                               self.F_d, self.f_d, self.psi_vertices, self.K)

    def output(self) -> Optional[OutputSpec]:
        if self.output_spec is None:
            return None
        o = self.output_spec
        return OutputSpec(o["C"], o["Dmat"], o["F_y"], o["f_y"])

    def to_dict(self):
        d = {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "m": self.m,
            "F_x": self.F_x.tolist(),
            "f_x": self.f_x.tolist(),
            "F_u": self.F_u.tolist(),
            "f_u": self.f_u.tolist(),
            "F_d": self.F_d.tolist(),
            "f_d": self.f_d.tolist(),
            "psi_vertices": [p.tolist() for p in self.psi_vertices],
            "K": self.K.tolist(),
        }
        if self.output_spec is not None:
            d["output_spec"] = {
                k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.output_spec.items()
            }
        if self.tolerances:
            d["tolerances"] = dict(self.tolerances)
        return d

    @classmethod
    def from_system(cls, sys: UncertainSystem, tolerances=None):
        return cls(sys.n, sys.m, sys.F_x, sys.f_x, sys.F_u, sys.f_u, sys.F_d, sys.f_d,
                   list(sys.psi_vertices), sys.K, None, dict(tolerances or {}))


def parse_problem(text) -> ProblemFile:
    """Parse and validate a problem document; errors name the offending field or line."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ProblemFormatError("top level must be an object")
    version = d.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ProblemFormatError(f"field 'format_version': unsupported version {version}")
    n, m = _require(d, "n"), _require(d, "m")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemFormatError("field 'n': must be a positive integer")
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise ProblemFormatError("field 'm': must be a non-negative integer")
    F_x = _matrix(_require(d, "F_x"), "F_x", cols=n)
    f_x = _vector(_require(d, "f_x"), "f_x", F_x.shape[0])
    F_u = _matrix(_require(d, "F_u"), "F_u", cols=m, allow_empty=(m == 0))
    f_u = _vector(_require(d, "f_u"), "f_u", F_u.shape[0])
    F_d = _matrix(_require(d, "F_d"), "F_d", cols=n)
    f_d = _vector(_require(d, "f_d"), "f_d", F_d.shape[0])
    psi_raw = _require(d, "psi_vertices")
    if not isinstance(psi_raw, list) or not psi_raw:
        raise ProblemFormatError("field 'psi_vertices': needs a non-empty list of matrices")
    psi = [_matrix(p, f"psi_vertices[{i}]", rows=n, cols=n + m) for i, p in enumerate(psi_raw)]
    K = _matrix(_require(d, "K"), "K", rows=m, cols=n, allow_empty=(m == 0))
    out = None
    if d.get("output_spec") is not None:
        o = d["output_spec"]
        C = _matrix(_require(o, "C"), "output_spec.C", cols=n)
        Dm = _matrix(_require(o, "Dmat"), "output_spec.Dmat", rows=C.shape[0], cols=m, allow_empty=(m == 0))
        F_y = _matrix(_require(o, "F_y"), "output_spec.F_y", cols=C.shape[0])
        f_y = _vector(_require(o, "f_y"), "output_spec.f_y", F_y.shape[0])
        out = {"C": C, "Dmat": Dm, "F_y": F_y, "f_y": f_y, "include_input": bool(o.get("include_input", False))}
    tol = {}
    for k, v in (d.get("tolerances") or {}).items():
        if k not in TOLERANCE_KEYS:
            raise ProblemFormatError(f"field 'tolerances.{k}': unknown tolerance")
        try:
            tol[k] = TOLERANCE_KEYS[k](v)
        except (TypeError, ValueError):
            raise ProblemFormatError(f"field 'tolerances.{k}': not a number") from None
    unknown = set(d) - {"format_version", "n", "m", "F_x", "f_x", "F_u", "f_u", "F_d", "f_d",
                        "psi_vertices", "K", "output_spec", "tolerances"}
    if unknown:
        raise ProblemFormatError(f"unknown fields: {sorted(unknown)}")
    return ProblemFile(n, m, F_x, f_x, F_u, f_u, F_d, f_d, psi, K, out, tol)


def dumps(obj):
    """Canonical text of a problem/result object or plain dict."""
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def canonicalize(text):
    return dumps(parse_problem(text))


def input_hash(problem: ProblemFile):
    return hashlib.sha256(dumps(problem).encode("utf-8")).hexdigest()


def hpolytope_to_dict(P: HPolytope):
    return {"dim": P.dim, "F": np.asarray(P.F).tolist(), "f": np.asarray(P.f).tolist()}


def hpolytope_from_dict(d) -> HPolytope:
    return HPolytope(np.asarray(d["F"], dtype=float).reshape(-1, int(d["dim"])), d["f"])


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
