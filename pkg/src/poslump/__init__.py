"""Positive lumping of interval bilinear control systems.

Compute minimal constrained lumpings of interval positive systems, decide
properness, build reduced systems, reconstruct full-order controls from
reduced ones, simulate and compare trajectories, bracket optimal values by
brute force, and benchmark reductions over network families.
"""

from .linalg import (
    Tolerance,
    as_matrix,
    is_metzler,
    mdot,
    rref,
    right_pseudo_inverse,
    rowspan_contains,
    to_exact,
)
from .lumping import LumpingResult, brute_force_lumping_oracle, minimal_constrained_lumping
from .proper import (
    BlockPartition,
    CdFactorization,
    PropernessVerdict,
    cd_decompose,
    check_proper,
    column_equivalence_classes,
    construct_disjoint_support_basis,
)
from .pcs import ControlBox, IntervalMatrix, Pcs, ReducedPcs, reduce_pcs, validate_pcs
from .controls import PiecewiseControl, reconstruct_control, verify_reconstruction
from .simulate import (
    CostSpec,
    Trajectory,
    approx_values,
    evaluate_cost,
    simulate,
    verify_trajectory_equivalence,
)
from .bench import BenchReport, WeightedNetwork, build_pcs_family, load_edge_list, run_benchmark

__version__ = "0.1.0"

__all__ = [
    "Tolerance",
    "as_matrix",
    "is_metzler",
    "mdot",
    "rref",
    "right_pseudo_inverse",
    "rowspan_contains",
    "to_exact",
    "LumpingResult",
    "brute_force_lumping_oracle",
    "minimal_constrained_lumping",
    "BlockPartition",
    "CdFactorization",
    "PropernessVerdict",
    "cd_decompose",
    "check_proper",
    "column_equivalence_classes",
    "construct_disjoint_support_basis",
    "ControlBox",
    "IntervalMatrix",
    "Pcs",
    "ReducedPcs",
    "reduce_pcs",
    "validate_pcs",
    "PiecewiseControl",
    "reconstruct_control",
    "verify_reconstruction",
    "CostSpec",
    "Trajectory",
    "approx_values",
    "evaluate_cost",
    "simulate",
    "verify_trajectory_equivalence",
    "BenchReport",
    "WeightedNetwork",
    "build_pcs_family",
    "load_edge_list",
    "run_benchmark",
]
