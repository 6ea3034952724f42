"""Network ingestion and the lumping benchmark harness.

Each weighted network yields one interval system per non-constant state:
the drift interval is the adjacency matrix scaled by ``1 -/+ p`` and the
output singles out that state.  Every instance is classified by the kind of
its minimal constrained lumping:

* ``proper``       - non-negative lumping with disjoint row supports, k < n
* ``general``      - minimal lumping exists but is not proper
* ``none``         - the minimal lumping is the identity (no reduction)
* ``timeout``      - the closure did not finish within the budget

Reports aggregate per-network mean reduction ratios (over proper and
no-reduction instances; general lumpings and timeouts are excluded) with
the standard error of the mean, plus global category counts.
"""

from __future__ import annotations

import csv
import io as _io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import EmptyNetwork, NonPositiveWeight, ParseError, TimeoutExceeded
from .linalg import DEFAULT_TOL, Tolerance
from .lumping import minimal_constrained_lumping
from .pcs import ControlBox, IntervalMatrix, Pcs
from .proper import check_proper

__all__ = [
    "WeightedNetwork",
    "BenchRecord",
    "BenchReport",
    "load_edge_list",
    "build_pcs_family",
    "run_benchmark",
]


@dataclass(frozen=True)
class WeightedNetwork:
    """Edge list with positive weights; node ids are 1..n externally."""

    name: str
    n: int
    edges: tuple  # (source, target, weight) with 0-based node ids
    directed: bool = True

    def adjacency(self, sparse: bool = True):
        """Drift matrix: entry (i, j) accumulates the weight of edges j -> i,
        so states propagate along edges under ``dx/dt = A x``.  Undirected
        networks contribute both orientations."""
        rows, cols, vals = [], [], []
        for s, t, w in self.edges:
            rows.append(t)
            cols.append(s)
            vals.append(w)
            if not self.directed and s != t:
                rows.append(s)
                cols.append(t)
                vals.append(w)
        A = sp.coo_matrix((vals, (rows, cols)), shape=(self.n, self.n)).tocsr()
        A.sum_duplicates()
        return A if sparse else A.toarray()


def load_edge_list(path) -> WeightedNetwork:
    """Parse ``src dst [weight]`` lines (1-based ids, ``#`` comments,
    default weight 1.0).  A ``# undirected`` comment anywhere marks the
    network as undirected.  Duplicate edges are summed at matrix build."""
    path = Path(path)
    edges = []
    directed = True
    max_node = 0
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "undirected" in line.lower():
                    directed = False
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(str(path), lineno, f"expected 'src dst [weight]', got {line!r}")
            try:
                s, t = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise ParseError(str(path), lineno, str(exc)) from None
            if w <= 0:
                raise NonPositiveWeight(str(path), lineno, w)
            if s < 1 or t < 1:
                raise ParseError(str(path), lineno, "node ids are 1-based")
            edges.append((s - 1, t - 1, w))
            max_node = max(max_node, s, t)
    return WeightedNetwork(name=path.stem, n=max_node, edges=tuple(edges), directed=directed)


def build_pcs_family(net: WeightedNetwork, perturbation: float = 0.1) -> list[tuple[int, Pcs]]:
    """One interval system per state with a nonzero drift row.

    Returns ``(state_index, pcs)`` pairs (1-based indices in reports); the
    interval is ``[(1-p) A, (1+p) A]`` and the output reads that state.
    """
    if not 0.0 <= perturbation < 1.0:
        raise ValueError("perturbation must lie in [0, 1)")
    if net.n == 0 or not net.edges:
        raise EmptyNetwork(f"network {net.name!r} has no edges")
    A = net.adjacency(sparse=True)
    nonzero_rows = np.flatnonzero(np.diff(A.indptr) > 0)
    # bounds are shared across the family; Pcs never mutates them
    bounds = IntervalMatrix(
        lower=((1.0 - perturbation) * A).toarray(),
        upper=((1.0 + perturbation) * A).toarray(),
    )
    B = np.zeros((net.n, 1))
    U = ControlBox.zero(1)
    family = []
    for i in nonzero_rows:
        O = np.zeros((1, net.n))
        O[0, i] = 1.0
        family.append((int(i) + 1, Pcs(bounds=bounds, O=O, B=B, U=U)))
    return family


@dataclass(frozen=True)
class BenchRecord:
    network: str
    i: int  # 1-based output state index
    verdict: str  # proper | general | none | timeout
    k: int | None
    n: int
    ratio: float | None
    ms: float

    def to_json_dict(self, with_timing: bool = True) -> dict:
        out = {
            "network": self.network,
            "i": self.i,
            "verdict": self.verdict,
            "k": self.k,
            "n": self.n,
            "ratio": self.ratio,
        }
        if with_timing:
            out["ms"] = round(self.ms, 3)
        return out


@dataclass(frozen=True)
class BenchReport:
    records: tuple
    perturbation: float
    timeout: float | None

    @property
    def summary(self) -> dict:
        counts = {"proper": 0, "general": 0, "none": 0, "timeout": 0}
        for r in self.records:
            counts[r.verdict] += 1
        return counts

    def percentages(self) -> dict:
        total = max(len(self.records), 1)
        return {k: 100.0 * v / total for k, v in self.summary.items()}

    def network_aggregates(self) -> dict:
        """Per-network mean reduction ratio and SEM over instances with a
        proper or no-reduction verdict (general lumpings and timeouts are
        excluded from the mean)."""
        nets: dict[str, list[float]] = {}
        for r in self.records:
            if r.verdict in ("proper", "none"):
                nets.setdefault(r.network, []).append(r.ratio)
        out = {}
        for name in sorted(nets):
            ratios = np.asarray(nets[name])
            sem = float(ratios.std(ddof=1) / np.sqrt(len(ratios))) if len(ratios) > 1 else 0.0
            out[name] = {"mean_ratio": float(ratios.mean()), "sem": sem, "count": len(ratios)}
        return out

    def to_json_dict(self, with_timing: bool = True) -> dict:
        return {
            "records": [r.to_json_dict(with_timing) for r in self.records],
            "summary": self.summary,
            "percentages": {k: round(v, 3) for k, v in self.percentages().items()},
            "networks": self.network_aggregates(),
            "perturbation": self.perturbation,
            "timeout": self.timeout,
        }

    def canonical_json(self) -> str:
        """Deterministic serialization (timings stripped) for snapshotting."""
        return json.dumps(self.to_json_dict(with_timing=False), indent=2, sort_keys=True) + "\n"

    def to_csv(self, with_timing: bool = True) -> str:
        buf = _io.StringIO()
        fields = ["network", "i", "verdict", "k", "n", "ratio"] + (["ms"] if with_timing else [])
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        for r in self.records:
            writer.writerow(r.to_json_dict(with_timing))
        return buf.getvalue()


def classify_pcs(pcs: Pcs, tol: Tolerance = DEFAULT_TOL, timeout: float | None = None):
    """Minimal lumping -> verdict. Returns (verdict, k or None)."""
    try:
        res = minimal_constrained_lumping(pcs.generators(), pcs.O, tol=tol, budget=timeout)
    except TimeoutExceeded:
        return "timeout", None
    verdict = check_proper(res.L, tol)
    if verdict.kind == "identity":
        return "none", res.k
    if verdict.kind == "proper":
        return "proper", res.k
    return "general", res.k


def run_benchmark(
    network_paths,
    perturbation: float = 0.1,
    timeout: float | None = 600.0,
    jobs: int = 1,
    tol: Tolerance = DEFAULT_TOL,
) -> BenchReport:
    """Classify every instance of every network; deterministic given inputs.

    Instances run independently (optionally on a thread pool); records are
    merged order-independently and sorted by (network, state index).
    """
    tasks = []
    for path in network_paths:
        net = load_edge_list(path)
        for i, pcs in build_pcs_family(net, perturbation):
            tasks.append((net.name, i, pcs))

    def run_one(task):
        name, i, pcs = task
        t0 = time.perf_counter()
        verdict, k = classify_pcs(pcs, tol=tol, timeout=timeout)
        ms = (time.perf_counter() - t0) * 1000.0
        n = pcs.n
        ratio = (k / n) if k is not None else None
        return BenchRecord(network=name, i=i, verdict=verdict, k=k, n=n, ratio=ratio, ms=ms)

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_one, tasks))
    else:
        records = [run_one(t) for t in tasks]
    records.sort(key=lambda r: (r.network, r.i))
    return BenchReport(records=tuple(records), perturbation=perturbation, timeout=timeout)
