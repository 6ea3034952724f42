"""Shared random-instance builders for the test suite.

Lumpable interval systems are constructed from an explicit block design:
pick a partition of the states, positive per-state weights, and a reduced
core matrix, then spread each reduced rate over the rows of its block.  By
construction the designed weighted block matrix is a constrained lumping of
every matrix built this way, so tests get instances with a known reduction.
"""

from fractions import Fraction

import numpy as np
import pytest

from poslump.lumping import LumpingResult, minimal_constrained_lumping
from poslump.linalg import rref
from poslump.pcs import ControlBox, IntervalMatrix, Pcs


def random_partition(rng, n, k, first_singleton=False):
    """Partition of range(n) into k nonempty blocks (optionally block 0 = {0})."""
    perm = rng.permutation(np.arange(1, n)) if first_singleton else rng.permutation(n)
    if first_singleton:
        cuts = sorted(rng.choice(np.arange(1, n - 1), size=k - 2, replace=False)) if k > 2 else []
        rest = np.split(perm, cuts) if k > 1 else []
        return [np.array([0])] + [np.sort(p) for p in rest]
    cuts = sorted(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else []
    return [np.sort(p) for p in np.split(perm, cuts)]


def block_matrix(blocks, lam, n):
    k = len(blocks)
    L = np.zeros((k, n))
    for r, H in enumerate(blocks):
        L[r, H] = lam[H]
    return L


def lumpable_metzler(rng, blocks, lam, n, density=1.0, core=None):
    """Random Metzler matrix lumped by the weighted block design.

    The condition is that the weighted block-column sums of each column
    depend on the column only through its block; entries are spread with a
    random Dirichlet split so the matrix is non-negative (hence Metzler).
    """
    k = len(blocks)
    blk = np.zeros(n, dtype=int)
    for r, H in enumerate(blocks):
        blk[H] = r
    if core is None:
        core = rng.uniform(0.0, 1.5, (k, k)) * (rng.random((k, k)) < density)
    A = np.zeros((n, n))
    for j in range(n):
        for r, H in enumerate(blocks):
            if core[r, blk[j]] == 0.0:
                continue
            w = rng.dirichlet(np.ones(len(H)))
            A[H, j] += w * core[r, blk[j]] * lam[j] / lam[H]
    return A


def lumpable_interval_pcs(rng, n, k, m=1, weighted=True, with_x0=True, gap_density=0.6):
    """Interval PCS whose designed weighted block matrix lumps both bounds.

    Returns (pcs, L_design).  The output matrix is a non-negative random
    combination of the design rows, so the design is a constrained lumping
    with respect to it.
    """
    blocks = random_partition(rng, n, k)
    lam = rng.uniform(0.5, 2.0, n) if weighted else np.ones(n)
    L = block_matrix(blocks, lam, n)
    A_lo = lumpable_metzler(rng, blocks, lam, n)
    gap = lumpable_metzler(rng, blocks, lam, n, density=gap_density)
    A_hi = A_lo + gap
    coeffs = rng.uniform(0.1, 1.0, (1, k))
    O = coeffs @ L
    B = rng.uniform(0.0, 1.0, (n, m)) * (rng.random((n, m)) < 0.7)
    U = ControlBox(upper=rng.uniform(0.5, 1.5, m))
    x0 = rng.uniform(0.0, 2.0, n) if with_x0 else None
    pcs = Pcs(bounds=IntervalMatrix(A_lo, A_hi), O=O, B=B, U=U, x0=x0)
    return pcs, L


def engine_lumping(pcs) -> LumpingResult:
    return minimal_constrained_lumping(pcs.generators(), pcs.O)


def proper_lumpable_instance(rng, n_max=8, k_max=4, m=1, weighted=True):
    """Instance whose minimal lumping is proper with the designed dimension.

    Resamples until the engine recovers the designed block structure (the
    designed row space is always closed; on rare degenerate draws the
    closure of O is strictly smaller, which the loop rejects).
    """
    while True:
        n = int(rng.integers(3, n_max + 1))
        k = int(rng.integers(2, min(k_max, n - 1) + 1))
        pcs, L = lumpable_interval_pcs(rng, n, k, m=m, weighted=weighted)
        res = engine_lumping(pcs)
        if res.k == k:
            from poslump.proper import check_proper

            if check_proper(res.L).kind == "proper":
                return pcs, res


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
