"""Interval positive control systems and their reduction by proper lumpings.

A system couples an entrywise interval of Metzler drift matrices with a
non-negative input matrix, a compact non-negative control set containing
the origin, and an output map.  Reduction by a proper lumping ``L``
produces the interval ``[L A_lo L+, L A_hi L+]``, output ``O L+``, input
``L B`` and the unchanged control set; order and the Metzler property are
preserved because both ``L`` and ``L+`` are entrywise non-negative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundsInverted,
    NegativeInitial,
    NegativeInput,
    NotALumping,
    NotMetzler,
    NotProper,
    ShapeMismatch,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    is_exact,
    is_metzler,
    mdot,
    metzler_violation,
    right_pseudo_inverse,
    to_float,
)
from .lumping import LumpingResult
from .proper import check_proper

__all__ = ["IntervalMatrix", "ControlBox", "Pcs", "ReducedPcs", "validate_pcs", "reduce_pcs"]


@dataclass(frozen=True)
class IntervalMatrix:
    """Entrywise interval ``[lower, upper]`` of equal-shape matrices."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = self.lower if isinstance(self.lower, np.ndarray) else as_matrix(self.lower)
        hi = self.upper if isinstance(self.upper, np.ndarray) else as_matrix(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape:
            raise ShapeMismatch(f"interval bounds have shapes {lo.shape} and {hi.shape}")

    @classmethod
    def point(cls, A) -> "IntervalMatrix":
        A = A if isinstance(A, np.ndarray) else as_matrix(A)
        return cls(lower=A, upper=A)

    @property
    def shape(self):
        return self.lower.shape

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def is_ordered(self, atol: float = 0.0) -> bool:
        if is_exact(self.lower) or is_exact(self.upper):
            return all(x >= 0 for x in (self.upper - self.lower).ravel())
        return bool(np.all(to_float(self.upper) - to_float(self.lower) >= -atol))

    def first_inversion(self, atol: float = 0.0):
        lo, hi = to_float(self.lower), to_float(self.upper)
        bad = np.argwhere(hi - lo < -atol)
        if bad.size:
            i, j = bad[0]
            return int(i), int(j)
        return None

    def contains(self, A, atol: float = 0.0) -> bool:
        A = to_float(A)
        return bool(
            np.all(A >= to_float(self.lower) - atol) and np.all(A <= to_float(self.upper) + atol)
        )


@dataclass(frozen=True)
class ControlBox:
    """Compact control domain in the non-negative orthant containing 0.

    Either an axis-anchored box ``[0, upper]`` or, alternatively, an
    explicit finite point set (which must include the origin).
    """

    upper: np.ndarray | None = None
    points: tuple | None = None

    def __post_init__(self):
        if (self.upper is None) == (self.points is None):
            raise ValueError("specify exactly one of 'upper' or 'points'")
        if self.upper is not None:
            u = np.asarray(self.upper, dtype=float).ravel()
            if not np.isfinite(u).all():
                raise ValueError("control box bound must be finite")
            if (u < 0).any():
                raise ValueError("control box bound must be non-negative")
            object.__setattr__(self, "upper", u)
        else:
            pts = tuple(np.asarray(p, dtype=float).ravel() for p in self.points)
            if not pts:
                raise ValueError("point set must be nonempty")
            if (np.stack(pts) < 0).any():
                raise ValueError("control points must be non-negative")
            if not any(np.allclose(p, 0.0) for p in pts):
                raise ValueError("control set must contain the origin")
            object.__setattr__(self, "points", pts)

    @classmethod
    def zero(cls, m: int = 1) -> "ControlBox":
        return cls(upper=np.zeros(m))

    @property
    def m(self) -> int:
        return len(self.upper) if self.upper is not None else len(self.points[0])

    def vertices(self) -> list[np.ndarray]:
        """Extreme points used by the brute-force value search."""
        if self.points is not None:
            return [p.copy() for p in self.points]
        axes = [sorted({0.0, float(u)}) for u in self.upper]
        return [np.array(v) for v in itertools.product(*axes)]

    def contains(self, u, atol: float = 1e-12) -> bool:
        u = np.asarray(u, dtype=float).ravel()
        if len(u) != self.m:
            return False
        if self.upper is not None:
            return bool(np.all(u >= -atol) and np.all(u <= self.upper + atol))
        return any(np.max(np.abs(u - p), initial=0.0) <= atol for p in self.points)


@dataclass(frozen=True)
class Pcs:
    """Interval positive control system with optional initial condition."""

    bounds: IntervalMatrix
    O: np.ndarray
    B: np.ndarray
    U: ControlBox
    x0: np.ndarray | None = None

    def __post_init__(self):
        exact = is_exact(self.bounds.lower)
        object.__setattr__(self, "O", as_matrix(self.O, exact=exact))
        object.__setattr__(self, "B", as_matrix(self.B, exact=exact))
        if self.x0 is not None:
            x0 = np.asarray(self.x0).ravel()
            if not exact:
                x0 = x0.astype(float)
            object.__setattr__(self, "x0", x0)

    @property
    def n(self) -> int:
        return self.bounds.shape[0]

    @property
    def m(self) -> int:
        return self.U.m

    @property
    def l(self) -> int:
        return self.O.shape[0]

    def generators(self):
        return [self.bounds.lower, self.bounds.upper]


@dataclass(frozen=True)
class ReducedPcs:
    """Reduction of a Pcs by a proper lumping, plus audit diagnostics."""

    bounds: IntervalMatrix
    O_red: np.ndarray
    B_red: np.ndarray
    U: ControlBox
    y0: np.ndarray | None
    lumping: LumpingResult
    diagnostics: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.bounds.shape[0]

    # Duck-typed aliases so simulation code can treat Pcs and ReducedPcs alike.
    @property
    def n(self) -> int:
        return self.k

    @property
    def O(self) -> np.ndarray:
        return self.O_red

    @property
    def B(self) -> np.ndarray:
        return self.B_red

    @property
    def x0(self):
        return self.y0


def validate_pcs(p: Pcs) -> None:
    """Check every structural invariant; raise on the first violation.

    Order of checks: shape coherence, Metzler property of both bounds,
    interval order, non-negativity of ``B``, non-negativity of ``x0``.
    """
    lo, hi = p.bounds.lower, p.bounds.upper
    if lo.shape[0] != lo.shape[1]:
        raise ShapeMismatch(f"drift bounds must be square, got {lo.shape}")
    n = lo.shape[0]
    if p.O.shape[1] != n:
        raise ShapeMismatch(f"output matrix has {p.O.shape[1]} columns, expected {n}")
    if p.B.shape[0] != n:
        raise ShapeMismatch(f"input matrix has {p.B.shape[0]} rows, expected {n}")
    if p.B.shape[1] != p.U.m:
        raise ShapeMismatch(
            f"input matrix has {p.B.shape[1]} columns but the control set is {p.U.m}-dimensional"
        )
    if p.x0 is not None and len(p.x0) != n:
        raise ShapeMismatch(f"initial condition has length {len(p.x0)}, expected {n}")
    for M in (lo, hi):
        bad = metzler_violation(M)
        if bad is not None:
            raise NotMetzler(*bad)
    inv = p.bounds.first_inversion()
    if inv is not None:
        i, j = inv
        raise BoundsInverted(i, j, lo[i, j], hi[i, j])
    B = to_float(p.B)
    bad = np.argwhere(B < 0)
    if bad.size:
        i, j = bad[0]
        raise NegativeInput(int(i), int(j), B[i, j])
    if p.x0 is not None:
        x0 = to_float(np.atleast_2d(p.x0)).ravel()
        neg = np.flatnonzero(x0 < 0)
        if neg.size:
            raise NegativeInitial(int(neg[0]), x0[neg[0]])


def reduce_pcs(p: Pcs, lump: LumpingResult, tol: Tolerance = DEFAULT_TOL) -> ReducedPcs:
    """Build the reduced system ``([L A_lo L+, L A_hi L+], O L+, L B, U)``.

    Requires ``lump.L`` to be proper and a constrained lumping of both
    bounds with respect to ``p.O``; refuses anything else so the reduced
    system always has a positive-system interpretation.
    """
    L = lump.L
    verdict = check_proper(L, tol)
    if not verdict.is_proper:
        raise NotProper(f"reduction requires a proper lumping: {verdict.certificate}")
    Lp = right_pseudo_inverse(L, tol)
    exact = is_exact(L)
    checks = {}
    for name, M in (("O", p.O), ("lower", mdot(L, p.bounds.lower)), ("upper", mdot(L, p.bounds.upper))):
        resid = _relative_residual(M, mdot(M, Lp, L))
        checks[name] = resid
        limit = 0.0 if exact else tol.rank_rel * 10.0
        if resid > limit:
            raise NotALumping(name, resid)
    R_lo = mdot(L, p.bounds.lower, Lp)
    R_hi = mdot(L, p.bounds.upper, Lp)
    scale = 1.0 if exact else max(np.max(np.abs(to_float(R_hi)), initial=0.0), 1.0)
    atol = 0.0 if exact else tol.compare_abs * scale * 100.0
    reduced = IntervalMatrix(lower=R_lo, upper=R_hi)
    if not (is_metzler(R_lo, atol=atol) and is_metzler(R_hi, atol=atol)):
        raise NotALumping("reduced bounds lost the Metzler property", float("nan"))
    if not reduced.is_ordered(atol=atol):
        raise NotALumping("reduced bounds lost the interval order", float("nan"))
    y0 = None if p.x0 is None else np.dot(L, p.x0)
    diagnostics = {
        "lumping_residuals": checks,
        "reduced_metzler": True,
        "reduced_ordered": True,
    }
    return ReducedPcs(
        bounds=reduced,
        O_red=mdot(p.O, Lp),
        B_red=mdot(L, p.B),
        U=p.U,
        y0=y0,
        lumping=lump,
        diagnostics=diagnostics,
    )


def _relative_residual(V, proj) -> float:
    if is_exact(V) or is_exact(proj):
        diff = V - proj
        num = max((abs(x) for x in np.asarray(diff).ravel()), default=0)
        return float(num)
    V = to_float(V)
    proj = to_float(proj)
    num = np.linalg.norm(V - proj, axis=1)
    den = np.maximum(np.linalg.norm(V, axis=1), 1e-300)
    return float(np.max(num / den, initial=0.0))
