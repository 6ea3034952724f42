"""File formats: coordinate/dense matrices, systems, schedules, reports.

Matrix formats
--------------
Coordinate text: header line ``rows cols nnz`` followed by ``i j value``
lines with 1-based indices; duplicate coordinates are summed.  Dense JSON:
``{"rows": r, "cols": c, "data": [[...], ...]}``; a bare nested list is
accepted wherever a matrix is expected.  In exact mode numbers may be
strings like ``"1/5"`` and are parsed as exact rationals.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .controls import PiecewiseControl
from .linalg import as_matrix, is_exact, to_exact
from .pcs import ControlBox, IntervalMatrix, Pcs

__all__ = [
    "load_matrix_text",
    "dump_matrix_text",
    "matrix_from_json",
    "matrix_to_json",
    "load_pcs_json",
    "dump_pcs_json",
    "control_from_json",
    "control_to_json",
]


def load_matrix_text(path, exact: bool = False) -> np.ndarray:
    """Read the ``rows cols nnz`` coordinate text format."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: expected header 'rows cols nnz'")
        rows, cols, nnz = (int(x) for x in header)
        conv = Fraction if exact else float
        M = np.zeros((rows, cols), dtype=object if exact else float)
        if exact:
            M[:] = Fraction(0)
        count = 0
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            i, j, val = line.split()
            M[int(i) - 1, int(j) - 1] += conv(val)
            count += 1
        if count != nnz:
            raise ValueError(f"{path}: header promises {nnz} entries, found {count}")
    return M


def dump_matrix_text(M, path) -> None:
    M = np.asarray(M)
    rows, cols = M.shape
    entries = [(i, j, M[i, j]) for i in range(rows) for j in range(cols) if M[i, j] != 0]
    with open(path, "w") as fh:
        fh.write(f"{rows} {cols} {len(entries)}\n")
        for i, j, v in entries:
            fh.write(f"{i + 1} {j + 1} {_fmt(v)}\n")


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v)
    f = float(v)
    return repr(int(f)) if f.is_integer() else repr(f)


def _entry_to_json(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    f = float(v)
    return int(f) if f.is_integer() else f


def matrix_from_json(obj, exact: bool = False) -> np.ndarray:
    """Accept ``{"rows","cols","data"}`` or a bare nested list."""
    if isinstance(obj, dict):
        data = obj["data"]
        M = _parse_rows(data, exact)
        if M.shape != (obj["rows"], obj["cols"]):
            raise ValueError(f"matrix data is {M.shape}, header says {(obj['rows'], obj['cols'])}")
        return M
    return _parse_rows(obj, exact)


def _parse_rows(data, exact: bool) -> np.ndarray:
    data = list(data)
    if data and not isinstance(data[0], (list, tuple)):
        data = [data]  # a flat list is a single row
    rows = [list(r) for r in data]
    if exact:
        return to_exact(np.array(rows, dtype=object))
    return as_matrix([[float(Fraction(x)) if isinstance(x, str) else float(x) for x in r] for r in rows])


def matrix_to_json(M) -> dict:
    M = np.asarray(M)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[_entry_to_json(v) for v in row] for row in M],
    }


def load_pcs_json(obj_or_path, exact: bool = False) -> Pcs:
    """System JSON: ``{"n", "lower", "upper", "O", "B", "u_max", "x0"}``.

    ``upper`` defaults to ``lower`` (point interval); ``B``/``u_max``
    default to a zero input channel; ``x0`` is optional.  ``u_points`` may
    replace ``u_max`` for an explicit finite control set.
    """
    obj = _load_json(obj_or_path, exact)
    lower = matrix_from_json(obj["lower"], exact)
    upper = matrix_from_json(obj["upper"], exact) if "upper" in obj else lower
    n = int(obj.get("n", lower.shape[0]))
    if lower.shape != (n, n):
        raise ValueError(f"lower bound is {lower.shape}, expected ({n}, {n})")
    O = matrix_from_json(obj["O"], exact)
    if "u_points" in obj:
        U = ControlBox(points=[np.asarray(p, dtype=float) for p in obj["u_points"]])
    elif "u_max" in obj:
        U = ControlBox(upper=np.asarray(obj["u_max"], dtype=float))
    else:
        U = ControlBox.zero(1)
    if "B" in obj:
        B = matrix_from_json(obj["B"], exact)
    else:
        B = np.zeros((n, U.m)) if not exact else to_exact(np.zeros((n, U.m)))
    x0 = None
    if obj.get("x0") is not None:
        vals = obj["x0"]
        if exact:
            x0 = np.array([Fraction(str(v)) for v in vals], dtype=object)
        else:
            x0 = np.array([float(Fraction(v)) if isinstance(v, str) else float(v) for v in vals])
    return Pcs(bounds=IntervalMatrix(lower, upper), O=O, B=B, U=U, x0=x0)


def dump_pcs_json(p: Pcs) -> dict:
    out = {
        "n": p.n,
        "lower": matrix_to_json(p.bounds.lower),
        "upper": matrix_to_json(p.bounds.upper),
        "O": matrix_to_json(p.O),
        "B": matrix_to_json(p.B),
    }
    if p.U.upper is not None:
        out["u_max"] = [float(u) for u in p.U.upper]
    else:
        out["u_points"] = [[float(x) for x in pt] for pt in p.U.points]
    if p.x0 is not None:
        out["x0"] = [_entry_to_json(v) for v in p.x0]
    return out


def control_from_json(obj_or_path, exact: bool = False) -> PiecewiseControl:
    """Schedule JSON: ``{"breakpoints": [...], "values": [<matrix>, ...]}``."""
    obj = _load_json(obj_or_path, exact)
    values = [matrix_from_json(v, exact) for v in obj["values"]]
    values = [v.ravel() if 1 in v.shape and obj.get("vector") else v for v in values]
    return PiecewiseControl(tuple(float(b) for b in obj["breakpoints"]), tuple(values))


def control_to_json(ctrl: PiecewiseControl, vector: bool = False) -> dict:
    out = {
        "breakpoints": list(ctrl.breakpoints),
        "values": [matrix_to_json(np.atleast_2d(v)) for v in ctrl.values],
    }
    if vector:
        out["vector"] = True
    return out


def _load_json(obj_or_path, exact: bool):
    if isinstance(obj_or_path, dict):
        return obj_or_path
    if hasattr(obj_or_path, "read"):
        text = obj_or_path.read()
    else:
        with open(obj_or_path) as fh:
            text = fh.read()
    if exact:
        # Exact parses keep decimal literals exact: 0.9 becomes 9/10.
        return json.loads(text, parse_float=Fraction, parse_int=int)
    return json.loads(text)
