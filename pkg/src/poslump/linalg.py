"""Exact-contract matrix kernels used by every other module.

Matrices are plain numpy arrays.  Two dtypes are supported everywhere:

* ``float64`` for ordinary numerical work, with tolerance-based rank and
  comparison decisions, and
* ``object`` holding :class:`fractions.Fraction` entries for exact rational
  mode, where every decision is exact.

``scipy.sparse`` matrices are accepted by the public entry points and
behave identically to their dense counterparts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import NotSquare, RankDeficient, ShapeMismatch

__all__ = [
    "Tolerance",
    "as_matrix",
    "is_exact",
    "to_exact",
    "to_float",
    "mdot",
    "rref",
    "right_pseudo_inverse",
    "rowspan_contains",
    "is_metzler",
]

#: Relative pivot threshold; a candidate pivot is accepted when its magnitude
#: exceeds ``rank_rel`` times the max absolute entry of its row before
#: elimination (scale-invariant rank rule).
DEFAULT_RANK_REL = 1e-9

#: Entrywise comparison slack for floating-point matrix equalities.
DEFAULT_COMPARE_ABS = 1e-12


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds for rank and comparison decisions.

    Parameters
    ----------
    rank_rel:
        Relative threshold for pivot acceptance and row-space residuals.
    compare_abs:
        Absolute slack for entrywise comparisons.
    """

    rank_rel: float = DEFAULT_RANK_REL
    compare_abs: float = DEFAULT_COMPARE_ABS

    def __post_init__(self):
        if not (self.rank_rel > 0 and self.compare_abs > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(M, *, exact: bool = False) -> np.ndarray:
    """Coerce ``M`` (nested lists, ndarray, or scipy sparse) to a 2-D array.

    With ``exact=True`` the result has ``object`` dtype with Fraction
    entries; otherwise ``float64``.  Finiteness is enforced.
    """
    if sp.issparse(M):
        M = M.toarray()
    A = np.asarray(M)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got ndim={A.ndim}")
    if exact:
        return to_exact(A)
    A = A.astype(float)
    if not np.isfinite(A).all():
        raise ValueError("matrix entries must be finite")
    return A


def is_exact(A: np.ndarray) -> bool:
    """True when ``A`` carries exact (Fraction) entries."""
    return getattr(A, "dtype", None) == object


def to_exact(A) -> np.ndarray:
    """Convert entries to Fractions.  Floats convert via their decimal repr,
    so ``0.9`` becomes ``9/10`` rather than its binary expansion."""
    A = np.asarray(A, dtype=object)

    def conv(x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        if isinstance(x, str):
            return Fraction(x)
        return Fraction(repr(float(x)))

    out = np.empty(A.shape, dtype=object)
    for idx in np.ndindex(A.shape):
        out[idx] = conv(A[idx])
    return out


def to_float(A) -> np.ndarray:
    if sp.issparse(A):
        return A.toarray().astype(float)
    return np.asarray(A, dtype=float)


def mdot(*Ms) -> np.ndarray:
    """Chained matrix product that works for float and object dtypes."""
    out = Ms[0]
    for M in Ms[1:]:
        out = np.dot(out, M)
    return out


def _zero(exact: bool):
    return Fraction(0) if exact else 0.0


def _one(exact: bool):
    return Fraction(1) if exact else 1.0


def rref(M, tol: Tolerance = DEFAULT_TOL):
    """Reduced row echelon form with tolerance-based pivoting.

    Parameters
    ----------
    M:
        Matrix (dense, sparse, or exact).
    tol:
        Pivot threshold; ignored in exact mode where pivoting is exact.

    Returns
    -------
    (R, rank, pivot_cols):
        ``R`` has the same shape as ``M`` with the nonzero rows first,
        ``rank`` is the number of nonzero rows and ``pivot_cols`` the
        0-based pivot column indices.  ``rowspan(R) == rowspan(M)``.
    """
    A = M if isinstance(M, np.ndarray) and M.ndim == 2 else as_matrix(M)
    if is_exact(A):
        return _rref_exact(A.copy())
    return _rref_float(to_float(A).copy() if not sp.issparse(A) else A.toarray(), tol)


def _rref_float(A: np.ndarray, tol: Tolerance):
    A = A.astype(float, copy=True)
    m, n = A.shape
    # Per-row scale frozen before elimination; pivots are judged against it.
    scale = np.max(np.abs(A), axis=1, initial=0.0)
    r = 0
    pivots: list[int] = []
    chunk = 64
    c = 0
    while r < m and c < n:
        # scan a block of columns at once for the next acceptable pivot
        end = min(c + chunk, n)
        sub = np.abs(A[r:m, c:end])
        best = np.argmax(sub, axis=0)
        vals = sub[best, np.arange(end - c)]
        thresh = tol.rank_rel * scale[r + best]
        hits = np.flatnonzero((vals > thresh) & (scale[r + best] > 0.0))
        if hits.size == 0:
            c = end
            continue
        cp = c + int(hits[0])
        p = r + int(best[hits[0]])
        if p != r:
            A[[r, p]] = A[[p, r]]
            scale[[r, p]] = scale[[p, r]]
        A[r, cp:] = A[r, cp:] / A[r, cp]
        A[r, cp] = 1.0
        mult = A[:, cp].copy()
        mult[r] = 0.0
        # rows already reduced are zero left of cp, so only columns >= cp move
        A[:, cp:] -= np.outer(mult, A[r, cp:])
        A[:, cp] = 0.0
        A[r, cp] = 1.0
        pivots.append(cp)
        r += 1
        c = cp + 1
    if r < m:
        A[r:] = 0.0
    # Snap sub-threshold residue in the pivot rows to exact zero so the
    # result is idempotent and sign checks downstream are stable.
    for i in range(r):
        A[i, np.abs(A[i]) <= tol.rank_rel * max(np.max(np.abs(A[i])), 1.0) * 1e-3] = 0.0
        A[i, pivots[i]] = 1.0
    return A, r, pivots


def _rref_exact(A: np.ndarray):
    m, n = A.shape
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        p = next((i for i in range(r, m) if A[i, c] != 0), None)
        if p is None:
            continue
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = A[r] / A[r, c]
        for i in range(m):
            if i != r and A[i, c] != 0:
                A[i] = A[i] - A[i, c] * A[r]
        pivots.append(c)
        r += 1
    zero = Fraction(0)
    for i in range(r, m):
        A[i] = zero
    return A, r, pivots


def _rank(L, tol: Tolerance) -> int:
    return rref(L, tol)[1]


def right_pseudo_inverse(L, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Generalized right inverse ``L+ = L^T (L L^T)^{-1}`` of a full-row-rank L.

    When ``L L^T`` is diagonal (always the case for matrices with pairwise
    disjoint row supports) the inversion reduces to entrywise division and
    no general linear solve is performed.

    Raises
    ------
    RankDeficient
        If ``rank(L) < rows(L)``.
    """
    A = L if isinstance(L, np.ndarray) else as_matrix(L)
    exact = is_exact(A)
    k, n = A.shape
    rank = _rank(A, tol)
    if rank < k:
        raise RankDeficient(f"matrix has {k} rows but rank {rank}")
    G = mdot(A, A.T)
    diag = np.array([G[i, i] for i in range(k)], dtype=G.dtype)
    off = G - np.diag(diag)
    if exact:
        offzero = all(off[i, j] == 0 for i in range(k) for j in range(k))
    else:
        offzero = np.max(np.abs(off), initial=0.0) <= tol.compare_abs * max(np.max(np.abs(diag)), 1.0)
    if offzero:
        inv = np.array([_one(exact) / d for d in diag], dtype=G.dtype)
        return A.T * inv[np.newaxis, :]
    if exact:
        # Exact solve of G X = A by Gauss-Jordan on the augmented system.
        aug = np.concatenate([G, A], axis=1)
        R, rank, _ = _rref_exact(aug.copy())
        if rank < k:
            raise RankDeficient("L L^T is singular")
        return R[:, k:].T
    return np.linalg.solve(G, A).T


def rowspan_contains(L, V, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff every row of ``V`` lies in the row space of ``L``.

    Membership is tested through the projector ``L+ L``: a row ``v`` is
    contained when ``|v - v L+ L| <= rank_rel * |v|`` (zero rows are
    trivially contained).
    """
    A = L if isinstance(L, np.ndarray) else as_matrix(L)
    W = as_matrix(V, exact=is_exact(A))
    if A.shape[1] != W.shape[1]:
        raise ShapeMismatch(f"L has {A.shape[1]} columns, V has {W.shape[1]}")
    Lp = right_pseudo_inverse(A, tol)
    proj = mdot(W, Lp, A)
    if is_exact(A) or is_exact(W):
        return all((proj[i] == W[i]).all() for i in range(W.shape[0]))
    resid = np.linalg.norm(W - proj, axis=1)
    norms = np.linalg.norm(W, axis=1)
    return bool(np.all(resid <= tol.rank_rel * np.maximum(norms, 0.0) + np.finfo(float).tiny))


def is_metzler(M, atol: float = 0.0) -> bool:
    """True iff ``M`` is square with non-negative off-diagonal entries.

    ``atol`` admits tiny negative floating-point residue (used when checking
    matrices produced by arithmetic rather than given as data).
    """
    if sp.issparse(M):
        A = M.tocoo()
        if A.shape[0] != A.shape[1]:
            raise NotSquare(f"matrix is {A.shape[0]}x{A.shape[1]}")
        mask = A.row != A.col
        return bool(np.all(A.data[mask] >= -atol))
    A = M if isinstance(M, np.ndarray) else as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise NotSquare(f"matrix is {A.shape[0]}x{A.shape[1]}")
    if is_exact(A):
        n = A.shape[0]
        return all(A[i, j] >= 0 for i in range(n) for j in range(n) if i != j)
    off = A.copy().astype(float)
    np.fill_diagonal(off, 0.0)
    return bool(np.all(off >= -atol))


def metzler_violation(M, atol: float = 0.0):
    """First (i, j, value) with a negative off-diagonal entry, or None."""
    A = to_float(M) if not is_exact(np.asarray(M)) else np.asarray(M)
    n = A.shape[0]
    for i in range(n):
        for j in range(n):
            if i != j and A[i, j] < -atol:
                return i, j, A[i, j]
    return None
