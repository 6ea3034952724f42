"""Properness analysis of lumping matrices.

A full-row-rank matrix is *proper* when it is entrywise non-negative and
its rows have pairwise disjoint supports: every reduced variable is then a
positively weighted sum over a private block of original variables.  This
module decides properness, extracts the block partition and the ``L = C D``
split into a binary block indicator ``C`` and positive weights ``D``, and
implements the column-proportionality characterization that serves as an
independent route to a disjoint-support basis of the same row space.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotProper, RankDeficient
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, is_exact, mdot, rref

__all__ = [
    "BlockPartition",
    "CdFactorization",
    "PropernessVerdict",
    "check_proper",
    "cd_decompose",
    "column_equivalence_classes",
    "construct_disjoint_support_basis",
]


@dataclass(frozen=True)
class BlockPartition:
    """Partition of column indices induced by a proper matrix.

    ``blocks[r-1]`` is the support of row ``r`` (1-based block ids, matching
    the convention that block 0 collects the deleted variables), ``h0`` the
    set of identically zero columns, and ``block_of[i]`` is the block id of
    column ``i`` (0 for deleted).
    """

    h0: frozenset
    blocks: tuple
    block_of: np.ndarray

    @property
    def k(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class CdFactorization:
    """Split ``L = C diag(lam)`` with binary ``C`` and positive weights."""

    C: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class PropernessVerdict:
    kind: str  # "proper" | "general" | "identity"
    partition: BlockPartition | None = None
    cd: CdFactorization | None = None
    certificate: dict | None = None

    @property
    def is_proper(self) -> bool:
        return self.kind in ("proper", "identity")

    def to_json_dict(self) -> dict:
        if self.kind == "proper":
            return {
                "kind": "proper",
                "blocks": [sorted(i + 1 for i in b) for b in self.partition.blocks],
                "lambda": [_num(v) for v in self.cd.lam],
            }
        if self.kind == "identity":
            return {"kind": "identity"}
        return {"kind": "general", "certificate": self.certificate}


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    f = float(v)
    return int(f) if f.is_integer() else f


def _supports(L, zero_tol):
    if is_exact(L):
        return [set(np.flatnonzero([x != 0 for x in row]).tolist()) for row in L]
    return [set(np.flatnonzero(np.abs(row) > zero_tol).tolist()) for row in L]


def check_proper(L, tol: Tolerance = DEFAULT_TOL) -> PropernessVerdict:
    """Classify a full-row-rank matrix as proper / identity / general.

    * ``identity``: ``L`` equals the identity (a reduction that does not
      reduce anything);
    * ``proper``: non-negative entries and pairwise disjoint row supports;
      the verdict carries the block partition and the CD factorization;
    * ``general``: anything else, with a checkable certificate (a negative
      entry position or a pair of rows with overlapping supports).
    """
    L = L if isinstance(L, np.ndarray) else as_matrix(L)
    k, n = L.shape
    if rref(L, tol)[1] < k:
        raise RankDeficient("properness is only defined for full-row-rank matrices")
    exact = is_exact(L)
    if k == n:
        eye = np.eye(n) if not exact else np.array(
            [[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object
        )
        same = (L == eye).all() if exact else np.allclose(L, np.eye(n), atol=tol.compare_abs)
        if same:
            return PropernessVerdict(kind="identity")
    zero_tol = tol.compare_abs
    if exact:
        neg = [(i, j) for i in range(k) for j in range(n) if L[i, j] < 0]
    else:
        neg = list(zip(*np.where(L < -zero_tol)))
    if neg:
        i, j = neg[0]
        return PropernessVerdict(
            kind="general",
            certificate={"negative_entry": [int(i) + 1, int(j) + 1]},
        )
    supports = _supports(L, zero_tol)
    owner = {}
    for r, supp in enumerate(supports):
        for j in supp:
            if j in owner:
                return PropernessVerdict(
                    kind="general",
                    certificate={
                        "overlapping_rows": [owner[j] + 1, r + 1],
                        "column": int(j) + 1,
                    },
                )
            owner[j] = r
    partition = _partition_from_supports(supports, n)
    return PropernessVerdict(kind="proper", partition=partition, cd=_cd(L, partition))


def _partition_from_supports(supports, n):
    block_of = np.zeros(n, dtype=int)
    blocks = []
    for r, supp in enumerate(supports, start=1):
        blocks.append(frozenset(int(j) for j in supp))
        for j in supp:
            block_of[j] = r
    h0 = frozenset(int(j) for j in range(n) if block_of[j] == 0)
    return BlockPartition(h0=h0, blocks=tuple(blocks), block_of=block_of)


def _cd(L, partition: BlockPartition):
    k, n = L.shape
    exact = is_exact(L)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    lam = np.full(n, one, dtype=object if exact else float)
    C = np.full((k, n), zero, dtype=object if exact else float)
    for j in range(n):
        r = partition.block_of[j]
        if r > 0:
            lam[j] = L[r - 1, j]
            C[r - 1, j] = one
    return CdFactorization(C=C, lam=lam)


def cd_decompose(L, tol: Tolerance = DEFAULT_TOL) -> CdFactorization:
    """``L = C diag(lam)`` for a proper ``L``; weights of deleted columns are 1.

    Raises :class:`NotProper` when ``L`` is not proper.
    """
    verdict = check_proper(L, tol)
    if not verdict.is_proper:
        raise NotProper(f"matrix is not proper: {verdict.certificate}")
    if verdict.kind == "identity":
        L = L if isinstance(L, np.ndarray) else as_matrix(L)
        n = L.shape[0]
        supports = _supports(L, tol.compare_abs)
        return _cd(L, _partition_from_supports(supports, n))
    return verdict.cd


def block_partition(L, tol: Tolerance = DEFAULT_TOL) -> BlockPartition:
    verdict = check_proper(L, tol)
    if not verdict.is_proper:
        raise NotProper(f"matrix is not proper: {verdict.certificate}")
    if verdict.kind == "identity":
        L = L if isinstance(L, np.ndarray) else as_matrix(L)
        return _partition_from_supports(_supports(L, tol.compare_abs), L.shape[0])
    return verdict.partition


def column_equivalence_classes(L, tol: Tolerance = DEFAULT_TOL):
    """Partition of the nonzero columns under "is a scalar multiple of".

    Returns ``(Z, classes)`` where ``Z`` is the sorted list of nonzero
    column indices and ``classes`` groups them; two columns are equivalent
    when their normalized directions coincide up to sign within
    ``tol.rank_rel`` (exact proportionality in rational mode).
    """
    L = L if isinstance(L, np.ndarray) else as_matrix(L)
    exact = is_exact(L)
    k, n = L.shape
    if exact:
        nonzero = [j for j in range(n) if any(L[i, j] != 0 for i in range(k))]
    else:
        nonzero = np.flatnonzero(np.linalg.norm(L, axis=0) > tol.compare_abs).tolist()
    classes: list[list[int]] = []
    reps: list[int] = []
    for j in nonzero:
        placed = False
        for c, rep in enumerate(reps):
            if _proportional(L[:, rep], L[:, j], tol, exact):
                classes[c].append(j)
                placed = True
                break
        if not placed:
            classes.append([j])
            reps.append(j)
    return nonzero, [sorted(c) for c in classes]


def _proportional(u, v, tol, exact):
    if exact:
        # cross products vanish exactly
        k = len(u)
        return all(u[i] * v[j] == u[j] * v[i] for i in range(k) for j in range(i + 1, k))
    un = u / np.linalg.norm(u)
    vn = v / np.linalg.norm(v)
    return min(np.linalg.norm(un - vn), np.linalg.norm(un + vn)) <= tol.rank_rel


def construct_disjoint_support_basis(L, tol: Tolerance = DEFAULT_TOL):
    """Basis with pairwise disjoint row supports spanning ``rowspan(L)``.

    Exists iff the nonzero columns fall into exactly ``k`` proportionality
    classes; in that case the representative of each class (its smallest
    column index) is scaled to 1 and every class member carries the ratio of
    its column to the representative column.  Returns ``None`` when no such
    basis exists.
    """
    L = L if isinstance(L, np.ndarray) else as_matrix(L)
    exact = is_exact(L)
    k, n = L.shape
    _, classes = column_equivalence_classes(L, tol)
    if len(classes) != k:
        return None
    zero = Fraction(0) if exact else 0.0
    W = np.full((k, n), zero, dtype=object if exact else float)
    order = sorted(range(k), key=lambda c: classes[c][0])
    for r, c in enumerate(order):
        rep = classes[c][0]
        col = L[:, rep]
        if exact:
            row_idx = next(i for i in range(k) if col[i] != 0)
        else:
            row_idx = int(np.argmax(np.abs(col)))
        for j in classes[c]:
            W[r, j] = L[row_idx, j] / L[row_idx, rep]
    return W


def conjugate_by_weights(A, lam):
    """``diag(lam) A diag(lam)^{-1}`` without forming the diagonal matrices."""
    lam = np.asarray(lam)
    return (A * lam[:, None]) / lam[None, :]


def proper_pseudo_inverse_nonneg(L, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True when the right pseudo-inverse of a proper ``L`` is entrywise
    non-negative (it always is: ``L+ = L^T diag(1/||row||^2)``)."""
    from .linalg import right_pseudo_inverse

    Lp = right_pseudo_inverse(L, tol)
    if is_exact(np.asarray(Lp)):
        return all(x >= 0 for x in np.asarray(Lp).ravel())
    return bool(np.all(np.asarray(Lp) >= -tol.compare_abs))
