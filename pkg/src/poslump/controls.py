"""Piecewise-constant control schedules and reconstruction of full-order
matrix controls from reduced ones.

Given a proper lumping ``L = C D`` of an interval system and any reduced
schedule ``R(.)`` inside the reduced interval, an original schedule
``A(.)`` inside the original interval is recovered in closed form, piece by
piece, such that ``L A(t) L+ = R(t)`` and ``y = L x`` holds along the
corresponding trajectories.  The per-entry rule interpolates between the
conjugated extremes proportionally to how far ``R`` sits above the reduced
lower bound, normalized by the block column gap; entries whose block gap
vanishes fall back to the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ControlOutOfBounds, GridMismatch, NotProper
from .linalg import DEFAULT_TOL, Tolerance, is_exact, mdot, right_pseudo_inverse, to_float
from .lumping import LumpingResult
from .pcs import IntervalMatrix, Pcs
from .proper import check_proper, cd_decompose

__all__ = ["PiecewiseControl", "reconstruct_control", "verify_reconstruction", "ReconstructionReport"]

#: Below this block-gap magnitude the interpolation denominator is treated
#: as zero and the lower-bound fallback applies (float mode only).
DENOMINATOR_FLOOR = 1e-14


@dataclass(frozen=True)
class PiecewiseControl:
    """Right-continuous piecewise-constant schedule.

    ``values[j]`` holds on ``[breakpoints[j], breakpoints[j+1])`` and the
    last value from the last breakpoint onwards.  Breakpoints start at 0 and
    increase strictly.  Works for matrix-valued (2-D) and vector-valued
    (1-D) schedules alike.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(float(t) for t in self.breakpoints)
        if not bps or bps[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if any(b >= a for b, a in zip(bps, bps[1:])):
            raise ValueError("breakpoints must increase strictly")
        vals = tuple(np.asarray(v) for v in self.values)
        if len(vals) != len(bps):
            raise ValueError(f"{len(bps)} breakpoints need {len(bps)} values, got {len(vals)}")
        shapes = {v.shape for v in vals}
        if len(shapes) != 1:
            raise ValueError(f"all pieces must share one shape, got {shapes}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value) -> "PiecewiseControl":
        return cls(breakpoints=(0.0,), values=(value,))

    @property
    def pieces(self) -> int:
        return len(self.values)

    @property
    def shape(self):
        return self.values[0].shape

    def at(self, t: float):
        idx = int(np.searchsorted(self.breakpoints, t, side="right") - 1)
        return self.values[max(idx, 0)]

    def map_values(self, fn) -> "PiecewiseControl":
        return PiecewiseControl(self.breakpoints, tuple(fn(v) for v in self.values))

    def within(self, interval: IntervalMatrix, atol: float = 1e-9) -> bool:
        return all(interval.contains(v, atol=atol) for v in self.values)


def _blockwise_tables(lump: LumpingResult, pcs: Pcs, tol: Tolerance):
    L = lump.L
    verdict = check_proper(L, tol)
    if not verdict.is_proper:
        raise NotProper(f"reconstruction requires a proper lumping: {verdict.certificate}")
    fac = cd_decompose(L, tol)
    lam = np.asarray(fac.lam)
    exact = is_exact(L)
    A_lo, A_hi = pcs.bounds.lower, pcs.bounds.upper
    # conjugated extremes M = D A D^-1
    M_lo = (A_lo * lam[:, None]) / lam[None, :]
    M_hi = (A_hi * lam[:, None]) / lam[None, :]
    Lp = right_pseudo_inverse(L, tol)
    R_lo = mdot(L, A_lo, Lp)
    R_hi = mdot(L, A_hi, Lp)
    if verdict.kind == "identity":
        from .proper import block_partition

        part = block_partition(L, tol)
    else:
        part = verdict.partition
    blk = part.block_of  # 0 marks deleted columns
    k = L.shape[0]
    n = L.shape[1]
    gap = M_hi - M_lo
    den = np.zeros((k, n), dtype=object if exact else float)
    for r in range(1, k + 1):
        rows = np.flatnonzero(blk == r)
        den[r - 1] = gap[rows].sum(axis=0)
    return lam, blk, M_lo, M_hi, R_lo, R_hi, den, exact


def reconstruct_control(
    R: PiecewiseControl,
    lump: LumpingResult,
    pcs: Pcs,
    tol: Tolerance = DEFAULT_TOL,
) -> PiecewiseControl:
    """Full-order schedule ``A(.)`` with ``L A(t) L+ = R(t)`` piecewise.

    ``R`` must lie inside the reduced interval; the result lies inside the
    original interval, shares the breakpoints of ``R``, and is lumped by
    ``L`` on every piece.

    Raises
    ------
    ControlOutOfBounds
        When a piece of ``R`` leaves the reduced interval.
    NotProper
        When the lumping is not proper.
    """
    lam, blk, M_lo, M_hi, R_lo, R_hi, den, exact = _blockwise_tables(lump, pcs, tol)
    reduced = IntervalMatrix(lower=R_lo, upper=R_hi)
    scale = 1.0 if exact else max(np.max(np.abs(to_float(R_hi)), initial=0.0), 1.0)
    slack = 0.0 if exact else 1e-9 * scale
    pieces = []
    for idx, Rv in enumerate(R.values):
        if exact:
            Rv_ = np.asarray(Rv)
            inside = all(
                R_lo[i, j] <= Rv_[i, j] <= R_hi[i, j]
                for i in range(Rv_.shape[0])
                for j in range(Rv_.shape[1])
            )
        else:
            inside = reduced.contains(Rv, atol=slack)
        if not inside:
            raise ControlOutOfBounds(f"piece {idx} leaves the reduced interval")
        pieces.append(_reconstruct_piece(Rv, lam, blk, M_lo, M_hi, R_lo, den, exact))
    return PiecewiseControl(R.breakpoints, tuple(pieces))


def _reconstruct_piece(Rv, lam, blk, M_lo, M_hi, R_lo, den, exact):
    n = len(blk)
    Rv = np.asarray(Rv)
    A = np.empty((n, n), dtype=object if exact else float)
    ratio = lam[None, :] / lam[:, None]  # lam_i^{-1} lam_j
    if exact:
        for i in range(n):
            for j in range(n):
                r, s = blk[i], blk[j]
                if r > 0 and s > 0 and den[r - 1, j] != 0:
                    frac = (Rv[r - 1, s - 1] - R_lo[r - 1, s - 1]) / den[r - 1, j]
                    A[i, j] = ratio[i, j] * (M_lo[i, j] + (M_hi[i, j] - M_lo[i, j]) * frac)
                else:
                    A[i, j] = ratio[i, j] * M_lo[i, j]
        return A
    # vectorized float path
    rr = blk[:, None]  # block of the row index
    ss = blk[None, :]  # block of the column index
    live = (rr > 0) & (ss > 0)
    r_idx = np.clip(rr - 1, 0, None)
    s_idx = np.clip(ss - 1, 0, None)
    den_full = den[np.clip(blk - 1, 0, None)]  # den_full[i, j] = den[[i], j]
    den_ok = live & (np.abs(den_full) > DENOMINATOR_FLOOR)
    delta = (Rv - R_lo)[r_idx, s_idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(den_ok, delta / np.where(den_ok, den_full, 1.0), 0.0)
    A = ratio * (M_lo + (M_hi - M_lo) * frac)
    fallback = ratio * M_lo
    return np.where(den_ok, A, fallback)


@dataclass(frozen=True)
class ReconstructionReport:
    """Per-piece audit of a reconstructed schedule."""

    bounds_ok: tuple
    projection_error: tuple  # ||L A L+ - R||_inf per piece
    lumping_residual: tuple  # row-space residual of L A per piece
    tol: float

    @property
    def ok(self) -> bool:
        return (
            all(self.bounds_ok)
            and all(e <= self.tol for e in self.projection_error)
            and all(e <= self.tol for e in self.lumping_residual)
        )

    @property
    def max_projection_error(self) -> float:
        return max(self.projection_error)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "bounds_ok": list(self.bounds_ok),
            "projection_error": list(self.projection_error),
            "lumping_residual": list(self.lumping_residual),
            "tol": self.tol,
        }


def verify_reconstruction(
    A: PiecewiseControl,
    R: PiecewiseControl,
    lump: LumpingResult,
    pcs: Pcs,
    tol: float = 1e-9,
) -> ReconstructionReport:
    """Audit a schedule pair: bound membership, ``L A L+ == R`` and the
    lumping property of every piece.  Never raises; the report carries
    failures."""
    if A.breakpoints != R.breakpoints:
        raise GridMismatch("schedules must share breakpoints")
    L = lump.L
    Lp = right_pseudo_inverse(L)
    bounds_ok = []
    proj_err = []
    lump_resid = []
    for Av, Rv in zip(A.values, R.values):
        Av = to_float(Av)
        Rv = to_float(Rv)
        bounds_ok.append(pcs.bounds.contains(Av, atol=tol))
        LALp = to_float(L) @ Av @ to_float(Lp)
        proj_err.append(float(np.max(np.abs(LALp - Rv), initial=0.0)))
        LA = to_float(L) @ Av
        resid = LA - LA @ to_float(Lp) @ to_float(L)
        den = max(float(np.max(np.abs(LA), initial=0.0)), 1.0)
        lump_resid.append(float(np.max(np.abs(resid), initial=0.0)) / den)
    return ReconstructionReport(
        bounds_ok=tuple(bounds_ok),
        projection_error=tuple(proj_err),
        lumping_residual=tuple(lump_resid),
        tol=tol,
    )
