"""Trajectory integration, cost evaluation and brute-force value bracketing.

Systems are integrated with classical fixed-step fourth-order Runge-Kutta.
Controls are piecewise constant, so the grid is aligned with the control
breakpoints and every inter-breakpoint piece is smooth; the per-piece step
count is rounded up to an even number so the same grid drives a composite
Simpson rule for running costs.

Value functions over all admissible controls are approximated from inside
by exhausting (or sampling) piecewise-constant schedules that take extreme
values: corner matrices of the drift interval and vertices of the control
box.  The resulting bracket satisfies ``v_inf >= V_inf`` and
``v_sup <= V_sup``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExceeded,
    GridMismatch,
    NegativeState,
    NonAdmissibleControl,
)
from .controls import PiecewiseControl
from .linalg import DEFAULT_TOL, right_pseudo_inverse, to_float
from .lumping import LumpingResult
from .pcs import IntervalMatrix, Pcs

__all__ = [
    "Trajectory",
    "CostSpec",
    "simulate",
    "verify_trajectory_equivalence",
    "evaluate_cost",
    "approx_values",
    "EquivalenceReport",
    "ValueBracket",
]

NEGATIVE_SLACK = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """States on an integration grid.

    ``pieces`` lists ``(start, stop)`` index ranges (inclusive endpoints)
    of the smooth segments between control breakpoints; Simpson quadrature
    runs per segment.
    """

    times: np.ndarray
    states: np.ndarray
    h: float
    pieces: tuple
    meta: dict = field(default_factory=dict)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self) -> str:
        n = self.states.shape[1]
        header = "t," + ",".join(f"x_{i + 1}" for i in range(n))
        lines = [header]
        for t, x in zip(self.times, self.states):
            lines.append(",".join([f"{t:.12g}"] + [f"{v:.12g}" for v in x]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CostSpec:
    """Running and final cost, optionally declared invariant under a lumping.

    Plain costs receive the state of whatever system they are evaluated on.
    When ``l_invariant_witness`` is set to a lumping matrix ``L``, both
    callables receive the aggregated state: ``L x`` on a full-order
    trajectory, the state itself on a reduced trajectory.  Invariance under
    ``L`` then holds by construction.
    """

    running: object = None  # psi(t, y, u) -> float
    final: object = None  # phi(y, u) -> float
    l_invariant_witness: np.ndarray | None = None

    def state_map(self, dim: int):
        L = self.l_invariant_witness
        if L is None:
            return lambda x: x
        L = to_float(L)
        if dim == L.shape[1]:
            return lambda x: L @ x
        if dim == L.shape[0]:
            return lambda x: x
        raise GridMismatch(
            f"state dimension {dim} matches neither side of the {L.shape} witness"
        )


def _as_control(ctrl, shape_hint=None) -> PiecewiseControl:
    if isinstance(ctrl, PiecewiseControl):
        return ctrl
    if ctrl is None:
        if shape_hint is None:
            raise ValueError("control is required")
        return PiecewiseControl.constant(np.zeros(shape_hint))
    return PiecewiseControl.constant(np.asarray(ctrl))


def _build_grid(breakpoints, tau, h):
    """Piecewise-uniform grid covering [0, tau], aligned with breakpoints,
    with an even number of steps (each <= h) per smooth piece."""
    cuts = sorted({0.0, tau} | {float(b) for b in breakpoints if 0.0 < b < tau})
    times = [0.0]
    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        span = b - a
        steps = max(2, int(np.ceil(span / h)))
        if steps % 2:
            steps += 1
        start = len(times) - 1
        seg = a + span * np.arange(1, steps + 1) / steps
        times.extend(seg.tolist())
        pieces.append((start, len(times) - 1))
    return np.array(times), tuple(pieces)


def simulate(system, A_ctrl, u_ctrl=None, x0=None, tau: float = 1.0, h: float = 1e-3) -> Trajectory:
    """Integrate ``dx/dt = A(t) x + B u(t)`` over ``[0, tau]`` with RK4.

    ``system`` is a :class:`Pcs` or a reduced system; ``A_ctrl`` and
    ``u_ctrl`` are piecewise-constant schedules (bare arrays are promoted to
    constants; ``u_ctrl=None`` means no exogenous input).  The state grid is
    aligned with all control breakpoints.

    Raises
    ------
    NonAdmissibleControl
        If a schedule leaves its admissible set.
    NegativeState
        If the state dips below the positivity slack, which signals an
        integration failure for a valid positive system.
    """
    bounds: IntervalMatrix = system.bounds
    n = bounds.shape[0]
    B = to_float(system.B)
    A_ctrl = _as_control(A_ctrl)
    u_ctrl = _as_control(u_ctrl, shape_hint=(B.shape[1],))
    scale = max(np.max(np.abs(to_float(bounds.upper)), initial=0.0), 1.0)
    for idx, Av in enumerate(A_ctrl.values):
        if Av.shape != (n, n):
            raise NonAdmissibleControl(f"drift piece {idx} has shape {Av.shape}, expected {(n, n)}")
        if not bounds.contains(Av, atol=1e-9 * scale):
            raise NonAdmissibleControl(f"drift piece {idx} leaves the admissible interval")
    for idx, uv in enumerate(u_ctrl.values):
        if not system.U.contains(uv, atol=1e-9):
            raise NonAdmissibleControl(f"input piece {idx} leaves the control set")
    if x0 is None:
        x0 = system.x0
    if x0 is None:
        raise ValueError("no initial condition given and the system carries none")
    x0 = to_float(np.atleast_2d(x0)).ravel()
    if len(x0) != n:
        raise GridMismatch(f"initial condition has length {len(x0)}, expected {n}")

    bps = set(A_ctrl.breakpoints) | set(u_ctrl.breakpoints)
    times, pieces = _build_grid(bps, tau, h)
    states = np.empty((len(times), n))
    states[0] = x0
    x = x0.copy()
    for start, stop in pieces:
        t0 = times[start]
        A = to_float(A_ctrl.at(t0))
        c = B @ to_float(u_ctrl.at(t0))
        dt = times[start + 1] - times[start]
        for i in range(start, stop):
            k1 = A @ x + c
            k2 = A @ (x + 0.5 * dt * k1) + c
            k3 = A @ (x + 0.5 * dt * k2) + c
            k4 = A @ (x + dt * k3) + c
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            states[i + 1] = x
    floor = states.min(initial=0.0)
    if floor < -NEGATIVE_SLACK * max(1.0, np.max(np.abs(states), initial=0.0)):
        raise NegativeState(f"state dipped to {floor:.3e}; integration failed")
    return Trajectory(times=times, states=states, h=h, pieces=pieces, meta={"n": n})


@dataclass(frozen=True)
class EquivalenceReport:
    max_deviation: float
    reduced_in_bounds: bool
    full: Trajectory
    reduced: Trajectory

    @property
    def ok(self) -> bool:
        return self.reduced_in_bounds


def verify_trajectory_equivalence(
    pcs: Pcs,
    lump: LumpingResult,
    A_ctrl,
    u_ctrl=None,
    x0=None,
    tau: float = 1.0,
    h: float = 1e-3,
) -> EquivalenceReport:
    """Integrate the full system under ``A(.)`` and the reduced system under
    ``R(t) = L A(t) L+`` with the same exogenous input, and report
    ``max_t |L x(t) - y(t)|_inf``.

    ``R`` always stays inside the reduced interval because the aggregation
    weights are non-negative; the deviation is small exactly when every
    piece of ``A(.)`` is lumped by ``L``.
    """
    from .pcs import reduce_pcs

    red = reduce_pcs(pcs, lump)
    L = to_float(lump.L)
    Lp = to_float(right_pseudo_inverse(lump.L))
    A_ctrl = _as_control(A_ctrl)
    R_ctrl = A_ctrl.map_values(lambda Av: L @ to_float(Av) @ Lp)
    scale = max(np.max(np.abs(to_float(red.bounds.upper)), initial=0.0), 1.0)
    in_bounds = all(red.bounds.contains(Rv, atol=1e-9 * scale) for Rv in R_ctrl.values)
    if x0 is None:
        x0 = pcs.x0
    if x0 is None:
        raise ValueError("no initial condition given and the system carries none")
    full = simulate(pcs, A_ctrl, u_ctrl, x0=x0, tau=tau, h=h)
    reduced = simulate(red, R_ctrl, u_ctrl, x0=L @ to_float(np.atleast_2d(x0)).ravel(), tau=tau, h=h)
    dev = float(np.max(np.abs(full.states @ L.T - reduced.states), initial=0.0))
    return EquivalenceReport(
        max_deviation=dev, reduced_in_bounds=in_bounds, full=full, reduced=reduced
    )


def evaluate_cost(traj: Trajectory, u_ctrl, cost: CostSpec, tau: float) -> float:
    """Final cost at ``tau`` plus composite-Simpson quadrature of the
    running cost over the trajectory grid."""
    times = traj.times
    if not np.isclose(times[-1], tau, rtol=0.0, atol=1e-12 * max(1.0, tau)):
        if tau > times[-1] + 1e-12:
            raise GridMismatch(f"trajectory covers [0, {times[-1]}], cost horizon is {tau}")
        raise GridMismatch("cost horizon must coincide with the trajectory end")
    u_ctrl = _as_control(u_ctrl, shape_hint=(0,))
    ymap = cost.state_map(traj.states.shape[1])
    total = 0.0
    if cost.final is not None:
        total += float(cost.final(ymap(traj.states[-1]), u_ctrl.at(tau)))
    if cost.running is not None:
        for start, stop in traj.pieces:
            uval = u_ctrl.at(times[start])
            idx = np.arange(start, stop + 1)
            vals = np.array(
                [float(cost.running(times[i], ymap(traj.states[i]), uval)) for i in idx]
            )
            total += _simpson(vals, times[start + 1] - times[start])
    return total


def _simpson(vals: np.ndarray, dt: float) -> float:
    n = len(vals) - 1
    if n % 2:
        raise GridMismatch("Simpson rule needs an even number of intervals per piece")
    if n == 0:
        return 0.0
    return float(dt / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-2:2].sum()))


@dataclass(frozen=True)
class ValueBracket:
    """Inner approximation of the optimal values over admissible controls."""

    v_inf: float
    v_sup: float
    argmin: tuple  # (A schedule, u schedule)
    argmax: tuple
    family_size: int

    def to_json_dict(self) -> dict:
        def sched(pair):
            A_ctrl, u_ctrl = pair
            return {
                "A": {
                    "breakpoints": list(A_ctrl.breakpoints),
                    "values": [np.asarray(v).tolist() for v in A_ctrl.values],
                },
                "u": {
                    "breakpoints": list(u_ctrl.breakpoints),
                    "values": [np.asarray(v).tolist() for v in u_ctrl.values],
                },
            }

        return {
            "v_inf": self.v_inf,
            "v_sup": self.v_sup,
            "family_size": self.family_size,
            "argmin": sched(self.argmin),
            "argmax": sched(self.argmax),
        }


def _corner_matrices(bounds: IntervalMatrix, corner_budget: int, seed: int):
    lo = to_float(bounds.lower)
    hi = to_float(bounds.upper)
    free = np.argwhere(hi - lo > 0.0)
    c = len(free)
    corners = []
    if c <= 16 and 2**c <= corner_budget:
        for bits in itertools.product((0, 1), repeat=c):
            M = lo.copy()
            for bit, (i, j) in zip(bits, free):
                if bit:
                    M[i, j] = hi[i, j]
            corners.append(M)
        return corners
    rng = np.random.default_rng(seed)
    corners = [lo.copy(), hi.copy()]
    while len(corners) < corner_budget:
        bits = rng.integers(0, 2, c)
        M = lo.copy()
        rows = free[bits == 1]
        if rows.size:
            M[rows[:, 0], rows[:, 1]] = hi[rows[:, 0], rows[:, 1]]
        corners.append(M)
    return corners


def approx_values(
    system,
    cost: CostSpec,
    x0,
    tau: float,
    switch_points: int = 0,
    corner_budget: int = 64,
    seed: int = 0,
    h: float = 1e-2,
    family_cap: int = 100_000,
) -> ValueBracket:
    """Bracket the optimal values by enumerating extremal piecewise-constant
    schedules.

    Drift schedules take corner values of the interval on each of
    ``switch_points + 1`` equal pieces; input schedules take control-box
    vertices.  With monotone costs the bracket is tight because the
    extremes are attained at the all-lower / all-upper corners.

    Raises :class:`BudgetExceeded` when the schedule family would exceed
    ``family_cap``.
    """
    corners = _corner_matrices(system.bounds, corner_budget, seed)
    verts = system.U.vertices()
    pieces = switch_points + 1
    family = len(corners) ** pieces * len(verts) ** pieces
    if family > family_cap:
        raise BudgetExceeded(
            f"{family} schedules exceed the cap of {family_cap}; lower switch_points or corner_budget"
        )
    bps = tuple(tau * j / pieces for j in range(pieces))
    best = worst = None
    arg_lo = arg_hi = None
    for A_combo in itertools.product(range(len(corners)), repeat=pieces):
        A_ctrl = PiecewiseControl(bps, tuple(corners[i] for i in A_combo))
        for u_combo in itertools.product(range(len(verts)), repeat=pieces):
            u_ctrl = PiecewiseControl(bps, tuple(verts[i] for i in u_combo))
            traj = simulate(system, A_ctrl, u_ctrl, x0=x0, tau=tau, h=h)
            J = evaluate_cost(traj, u_ctrl, cost, tau)
            if best is None or J < best:
                best, arg_lo = J, (A_ctrl, u_ctrl)
            if worst is None or J > worst:
                worst, arg_hi = J, (A_ctrl, u_ctrl)
    return ValueBracket(
        v_inf=float(best),
        v_sup=float(worst),
        argmin=arg_lo,
        argmax=arg_hi,
        family_size=family,
    )
