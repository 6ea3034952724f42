"""Minimal constrained lumping of a family of square matrices.

Given generators ``M_1..M_g`` (typically the two extremal matrices of an
interval system) and an output matrix ``O``, the engine computes the
smallest subspace that contains ``rowspan(O)`` and is invariant under
right-multiplication by every generator, and returns its reduced row
echelon basis ``L``.  Any such ``L`` satisfies ``rowspan(O) <= rowspan(L)``
and ``rowspan(L M_i) <= rowspan(L)``, i.e. the aggregation ``y = L x``
evolves autonomously for every generator and reproduces the output.

A deliberately different brute-force routine
(:func:`brute_force_lumping_oracle`) recomputes the closure dimension by
batch Krylov growth with SVD-based re-orthogonalization and serves as an
independent check at desk scale.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionTooLarge, ShapeMismatch, TimeoutExceeded
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, is_exact, rref

__all__ = ["LumpingResult", "minimal_constrained_lumping", "brute_force_lumping_oracle"]


@dataclass(frozen=True)
class LumpingResult:
    """RREF lumping matrix with closure diagnostics.

    Attributes
    ----------
    L:
        ``k x n`` matrix in reduced row echelon form.
    k, n:
        Reduced and original dimensions.
    closure_trace:
        One ``(generator_index, candidate_count)`` pair per basis row
        adjoined during closure (seed rows carry generator index -1).
    """

    L: np.ndarray
    k: int
    n: int
    closure_trace: tuple = field(default_factory=tuple)

    @property
    def reduction_ratio(self) -> float:
        return self.k / self.n


def _prepare_generators(generators, n, exact):
    gens = []
    for M in generators:
        if sp.issparse(M):
            if exact:
                M = as_matrix(M, exact=True)
            else:
                M = M.tocsr()
                if M.shape != (n, n):
                    raise ShapeMismatch(f"generator is {M.shape}, expected ({n}, {n})")
                gens.append(M)
                continue
        else:
            M = as_matrix(M, exact=exact)
        if M.shape != (n, n):
            raise ShapeMismatch(f"generator is {M.shape}, expected ({n}, {n})")
        gens.append(M)
    return gens


def minimal_constrained_lumping(
    generators,
    O,
    tol: Tolerance = DEFAULT_TOL,
    budget: float | None = None,
    exact: bool = False,
) -> LumpingResult:
    """Minimal common constrained lumping of ``generators`` w.r.t. ``O``.

    Parameters
    ----------
    generators:
        Square ``n x n`` matrices (dense, sparse, or exact); the row space
        is closed under right-multiplication by each of them.
    O:
        Output matrix with ``n`` columns, nonzero.
    tol:
        Rank and residual thresholds (ignored in exact mode).
    budget:
        Optional wall-clock limit in seconds.  On expiry
        :class:`TimeoutExceeded` is raised carrying the partial trace.
    exact:
        Run in exact rational arithmetic.

    Notes
    -----
    The closure seeds the basis with ``rref(O)`` and processes basis rows
    FIFO, visiting generators round-robin: each candidate ``v M`` is reduced
    against the current basis and adjoined when the residual norm exceeds
    ``tol.rank_rel`` times its pre-reduction norm.  A single RREF pass
    canonicalizes the final basis.  The work is bounded by
    ``O(k n (e + k))`` for ``e`` total nonzeros.
    """
    exact = exact or is_exact(np.asarray(O)) or any(
        not sp.issparse(M) and is_exact(np.asarray(M)) for M in generators
    )
    O = as_matrix(O, exact=exact)
    n = O.shape[1]
    gens = _prepare_generators(generators, n, exact)
    if not np.any(O):
        raise ValueError("output matrix O must be nonzero")
    deadline = None if budget is None else time.monotonic() + budget
    if exact:
        basis, trace = _closure_exact(gens, O, deadline)
        stacked = np.array(basis, dtype=object)
    else:
        basis, trace = _closure_float(gens, O, tol, deadline, n)
        stacked = basis
    k = stacked.shape[0]
    if k == n and not exact:
        # The closure filled the whole space; its unique RREF basis is I_n.
        L = np.eye(n)
        return LumpingResult(L=L, k=n, n=n, closure_trace=tuple(trace))
    R, rank, _ = rref(stacked, tol)
    L = R[:rank]
    return LumpingResult(L=L, k=rank, n=n, closure_trace=tuple(trace))


def _closure_float(gens, O, tol, deadline, n):
    R0, r0, _ = rref(O, tol)
    if r0 == 0:
        raise ValueError("output matrix O must be nonzero")
    Q = np.empty((min(max(2 * r0, 16), n), n))
    k = 0
    trace = []

    def ensure_capacity(Q, k):
        if k < Q.shape[0]:
            return Q
        grown = np.empty((min(2 * Q.shape[0], n), n))
        grown[:k] = Q[:k]
        return grown

    for i in range(r0):
        Q = ensure_capacity(Q, k)
        k = _insert_row(Q, k, R0[i], tol)
        trace.append((-1, 0))
    head = 0
    candidates = 0
    while head < k:
        if deadline is not None and time.monotonic() > deadline:
            raise TimeoutExceeded(
                f"closure stopped after {candidates} candidates at dimension {k}",
                partial_trace=trace,
            )
        for gi, M in enumerate(gens):
            candidates += 1
            w = np.asarray(Q[head] @ M).ravel()
            Q = ensure_capacity(Q, k)
            knew = _insert_row(Q, k, w, tol)
            if knew > k:
                k = knew
                trace.append((gi, candidates))
                if k == n:
                    return Q[:k], trace
        head += 1
    return Q[:k].copy(), trace


def _insert_row(Q, k, w, tol):
    """Two-pass Gram-Schmidt of ``w`` against ``Q[:k]``; extends the basis
    when the residual survives the scale-invariant acceptance test."""
    pre = np.linalg.norm(w)
    if pre == 0.0 or not np.isfinite(pre):
        return k
    w = w.astype(float, copy=True)
    for _ in range(2):
        if k:
            w -= Q[:k].T @ (Q[:k] @ w)
    nrm = np.linalg.norm(w)
    if nrm <= tol.rank_rel * pre:
        return k
    Q[k] = w / nrm
    return k + 1


def _closure_exact(gens, O, deadline):
    R0, r0, piv0 = rref(O)
    basis = []  # rows kept in echelon form with recorded pivot columns
    pivots = []
    trace = []

    def reduce_row(w):
        w = w.copy()
        for row, p in zip(basis, pivots):
            if w[p] != 0:
                w = w - w[p] * row
        return w

    def insert(w, gi, it):
        w = reduce_row(w)
        nz = next((j for j in range(len(w)) if w[j] != 0), None)
        if nz is None:
            return False
        basis.append(w / w[nz])
        pivots.append(nz)
        trace.append((gi, it))
        return True

    for i in range(r0):
        insert(R0[i], -1, 0)
    head = 0
    candidates = 0
    while head < len(basis):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeoutExceeded(
                f"closure stopped after {candidates} candidates at dimension {len(basis)}",
                partial_trace=trace,
            )
        v = basis[head]
        for gi, M in enumerate(gens):
            candidates += 1
            insert(np.dot(v, M), gi, candidates)
        head += 1
    return basis, trace


def brute_force_lumping_oracle(generators, O, tol: Tolerance = DEFAULT_TOL) -> int:
    """Dimension of the smallest subspace containing ``rowspan(O)`` and
    invariant under right-multiplication by each generator.

    Exhaustive Krylov-style growth: every round multiplies the *entire*
    current basis by every generator and re-orthogonalizes the stack with an
    SVD, so both the visiting order and the rank rule differ from the main
    engine.  Desk scale only (``n <= 12``).
    """
    O = as_matrix(O)
    n = O.shape[1]
    if n > 12:
        raise DimensionTooLarge(f"oracle is limited to n <= 12, got {n}")
    gens = [as_matrix(M) for M in generators]
    for M in gens:
        if M.shape != (n, n):
            raise ShapeMismatch(f"generator is {M.shape}, expected ({n}, {n})")

    def orth(rows):
        _, s, Vt = np.linalg.svd(rows, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return np.zeros((0, n))
        keep = s > tol.rank_rel * s[0] * np.sqrt(n)
        return Vt[keep]

    V = orth(O)
    while True:
        stack = [V] + [V @ M for M in gens]
        W = orth(np.vstack(stack))
        if W.shape[0] == V.shape[0]:
            return int(V.shape[0])
        V = W
