"""Hypograph cutting-plane methods.

``approximate_cutting_plane`` maximises over the minimum of affine envelope
cuts (one LP per iteration) and is the bounding routine used by the spatial
branch-and-bound.  ``exact_cutting_plane`` keeps the non-concave ReLU cuts,
modelled with binaries, and solves the resulting MILP by a small internal
branch-and-bound; it is only meant for tiny instances.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import lp
from .envelopes import Cut, CutKind, envelope_from_data
from .model import FEAS_TOL, BoxBounds, DomainError, OracleProblem, RefusalError, assert_nonnegative_at_lower

GRAD_CAP = 1e8
NUDGE = 1e-6
DUPLICATE_TOL = 1e-9
INTEGRALITY_TOL = 1e-7


class SolverError(RuntimeError):
    """An LP solve broke down numerically."""


class Termination(str, enum.Enum):
    DUPLICATE_CUT = "duplicate_cut"
    STALL = "stall"
    REL_GAP = "rel_gap"
    ITER_LIMIT = "iter_limit"
    ABS_GAP = "abs_gap"
    INFEASIBLE = "infeasible"


@dataclass
class CutPlaneOptions:
    stall_iters: int = 5
    subproblem_gap: float = 1e-3
    max_iterations: int = 200
    trace: Optional[object] = None  # path or text stream; one CSV line per iteration


@dataclass
class ExactOptions:
    binary_budget: int = 60
    max_iterations: Optional[int] = None  # defaults to binary_budget // n
    max_bb_nodes: int = 200_000
    trace: Optional[object] = None


@dataclass
class CutPlaneResult:
    lower_bound: float
    upper_bound: float
    incumbent: Optional[np.ndarray]
    cuts: list
    iterations: int
    termination: Termination
    history: list = field(default_factory=list)  # (LB, UB) after each iteration

    @property
    def infeasible(self) -> bool:
        return self.termination is Termination.INFEASIBLE

    @property
    def gap(self) -> float:
        return self.upper_bound - self.lower_bound


def relative_gap(lb: float, ub: float) -> float:
    return (ub - lb) / max(lb, 1e-12)


# ---------------------------------------------------------------------------
# support points


def safe_support(problem: OracleProblem, support, box: BoxBounds):
    """Return ``(s, F(s), grad F(s))`` with ``s`` moved off blown-up gradients.

    Components of the gradient above ``GRAD_CAP`` (or non-finite) on axes of
    positive width push ``s`` towards the box centre by ``1e-6`` of the width,
    doubling until the gradient is usable.  Any support in the box gives a
    valid cut, so this only affects tightness.
    """
    s = np.clip(np.asarray(support, dtype=float), box.lower, box.upper)
    wide = box.width > 0.0
    step = NUDGE
    for _ in range(40):
        g = np.asarray(problem.gradient(s), dtype=float)
        bad = wide & ~(np.isfinite(g) & (g <= GRAD_CAP))
        if not bad.any():
            break
        direction = np.where(s < box.midpoint, 1.0, -1.0)
        s = np.where(bad, s + direction * step * box.width, s)
        s = np.clip(s, box.lower, box.upper)
        step *= 2.0
    else:
        raise DomainError("gradient stays unbounded near the support point")
    g = np.where(wide, g, 0.0)
    return s, float(problem.value(s)), g


def _envelope(problem, support, box) -> Cut:
    s, f_s, g = safe_support(problem, support, box)
    return envelope_from_data(s, f_s, g, box)


def _is_duplicate(point, supports, tol=DUPLICATE_TOL) -> bool:
    return any(np.max(np.abs(point - s)) <= tol for s in supports)


@contextmanager
def _trace_writer(target, n):
    if target is None:
        yield None
        return
    if isinstance(target, io.TextIOBase) or hasattr(target, "write"):
        writer = csv.writer(target)
        writer.writerow(["iter", "LB", "UB"] + [f"support_{i}" for i in range(n)])
        yield writer
        return
    with open(target, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "LB", "UB"] + [f"support_{i}" for i in range(n)])
        yield writer


def _trace_row(writer, it, lb, ub, x):
    if writer is not None:
        writer.writerow([it, repr(float(lb)), repr(float(ub))] + [repr(float(v)) for v in x])


# ---------------------------------------------------------------------------
# approximate method (LP main problem)


def _cut_row(cut: Cut, n: int):
    # eta - coeffs . x <= intercept
    return (np.append(-cut.coeffs, 1.0), lp.LE, cut.intercept)


def _base_model(problem: OracleProblem, box: BoxBounds) -> lp.LpModel:
    n = box.n
    objective = np.zeros(n + 1)
    objective[n] = 1.0
    bounds = tuple(zip(box.lower, box.upper)) + ((0.0, math.inf),)
    cons = problem.constraints
    rows = tuple((np.append(cons.matrix[k], 0.0), lp.LE, cons.rhs[k]) for k in range(cons.m))
    return lp.LpModel(objective, rows, bounds)


def approximate_cutting_plane(
    problem: OracleProblem,
    box: Optional[BoxBounds] = None,
    inherited: Sequence[Cut] = (),
    opts: Optional[CutPlaneOptions] = None,
) -> CutPlaneResult:
    """Bound ``max F`` over ``box`` and ``A x <= b`` with envelope cuts.

    The returned ``upper_bound`` is the last LP value, which overestimates F
    on the region because every cut does; ``lower_bound`` is the best F seen
    at a feasible LP solution.  Only the cuts generated here are returned.
    """
    opts = opts or CutPlaneOptions()
    box = box or problem.box
    if not problem.box.contains_box(box):
        raise DomainError("sub-box is not inside the problem box")
    n = box.n

    model = _base_model(problem, box)
    if inherited:
        model = lp.add_rows(model, [_cut_row(c, n) for c in inherited])

    first = _envelope(problem, box.midpoint, box)
    own = [first]
    model = lp.add_row(model, *_cut_row(first, n))

    lb, ub = -math.inf, math.inf
    incumbent = None
    if problem.feasible(first.support):
        lb, incumbent = first.f_at_support, first.support.copy()

    history = []
    stall = 0
    termination = Termination.ITER_LIMIT
    it = 0
    with _trace_writer(opts.trace, n) as writer:
        for it in range(1, opts.max_iterations + 1):
            sol = lp.solve(model)
            if sol.status is lp.LpStatus.INFEASIBLE:
                return CutPlaneResult(-math.inf, -math.inf, None, own, it, Termination.INFEASIBLE, history)
            if not sol.optimal:
                raise SolverError(f"main LP ended with status {sol.status.value}")
            x = np.clip(sol.x[:n], box.lower, box.upper)
            eta = sol.x[n]

            improved = eta < ub - 1e-9 * max(1.0, abs(ub))
            ub = min(ub, eta)
            f_x = float(problem.value(x))
            if f_x > lb:
                lb, incumbent = f_x, x.copy()
            history.append((lb, ub))
            _trace_row(writer, it, lb, ub, x)

            if relative_gap(lb, ub) <= opts.subproblem_gap:
                termination = Termination.REL_GAP
                break
            if _is_duplicate(x, [c.support for c in own]):
                termination = Termination.DUPLICATE_CUT
                break
            stall = 0 if improved else stall + 1
            if stall >= opts.stall_iters:
                termination = Termination.STALL
                break
            cut = _envelope(problem, x, box)
            own.append(cut)
            model = lp.add_row(model, *_cut_row(cut, n))
    return CutPlaneResult(lb, ub, incumbent, own, it, termination, history)


# ---------------------------------------------------------------------------
# exact method (big-M MILP main problem)


@dataclass
class ReluGraphRows:
    """Rows over local columns ``(x_i, y, z)`` forcing ``y = max(x_i - s_i, 0)``."""

    index: int
    rows: list
    y_bounds: tuple
    z_bounds: tuple = (0.0, 1.0)

    def satisfied(self, x_i, y, z, tol=1e-12) -> bool:
        v = np.array([x_i, y, z])
        for coeffs, sense, rhs in self.rows:
            lhs = float(np.asarray(coeffs) @ v)
            if sense == lp.LE and lhs > rhs + tol:
                return False
            if sense == lp.GE and lhs < rhs - tol:
                return False
        lo, hi = self.y_bounds
        return lo - tol <= y <= hi + tol


def build_relu_graph_rows(support, box: BoxBounds, index: int) -> ReluGraphRows:
    s = float(np.asarray(support, dtype=float)[index])
    lo, hi = float(box.lower[index]), float(box.upper[index])
    if not lo - 1e-12 <= s <= hi + 1e-12:
        raise DomainError("support lies outside the box")
    s = min(max(s, lo), hi)
    rows = [
        (np.array([-1.0, 1.0, s - lo]), lp.LE, -lo),  # y <= x - l(1 - z) - s z
        (np.array([0.0, 1.0, -(hi - s)]), lp.LE, 0.0),  # y <= (u - s) z
        (np.array([1.0, -1.0, 0.0]), lp.LE, s),  # y >= x - s
    ]
    return ReluGraphRows(index, rows, (0.0, hi - s))


class _ExactMain:
    """MILP over ``(x, eta, y_1, z_1, y_2, z_2, ...)``."""

    def __init__(self, problem: OracleProblem, box: BoxBounds):
        self.problem = problem
        self.box = box
        self.n = box.n
        self.cuts: list = []
        self.rows: list = []
        self.bounds = list(zip(box.lower, box.upper)) + [(0.0, math.inf)]
        cons = problem.constraints
        self._cons_rows = [(cons.matrix[k], cons.rhs[k]) for k in range(cons.m)]

    @property
    def num_vars(self) -> int:
        return self.n + 1 + 2 * self.n * len(self.cuts)

    def z_columns(self) -> list:
        n = self.n
        return [n + 1 + 2 * n * q + n + i for q in range(len(self.cuts)) for i in range(n)]

    def add_cut(self, cut: Cut):
        n = self.n
        base = n + 1 + 2 * n * len(self.cuts)
        self.cuts.append(cut)
        for i in range(n):
            graph = build_relu_graph_rows(cut.support, self.box, i)
            y_col, z_col = base + i, base + n + i
            for local, sense, rhs in graph.rows:
                self.rows.append(({i: local[0], y_col: local[1], z_col: local[2]}, sense, rhs))
            self.bounds.append(graph.y_bounds)
        self.bounds.extend([graph.z_bounds] * n)
        coeffs = {n: 1.0}
        for i in range(n):
            if cut.grad_at_support[i] != 0.0:
                coeffs[base + i] = -float(cut.grad_at_support[i])
        self.rows.append((coeffs, lp.LE, cut.f_at_support))

    def model(self, fixings: dict) -> lp.LpModel:
        nv = self.num_vars
        objective = np.zeros(nv)
        objective[self.n] = 1.0
        rows = []
        for a, rhs in self._cons_rows:
            coeffs = np.zeros(nv)
            coeffs[: self.n] = a
            rows.append((coeffs, lp.LE, rhs))
        for sparse, sense, rhs in self.rows:
            coeffs = np.zeros(nv)
            for col, v in sparse.items():
                coeffs[col] = v
            rows.append((coeffs, sense, rhs))
        bounds = list(self.bounds)
        for col, val in fixings.items():
            bounds[col] = (float(val), float(val))
        return lp.LpModel(objective, tuple(rows), tuple(bounds))

    def solve(self, max_nodes: int):
        """Depth-first branch-and-bound on the binaries; returns ``(eta, x)`` or None."""
        best_eta, best_x = -math.inf, None
        zcols = self.z_columns()
        stack = [{}]
        nodes = 0
        while stack:
            fixings = stack.pop()
            nodes += 1
            if nodes > max_nodes:
                raise RefusalError("exact main problem exceeded its branch-and-bound node limit")
            sol = lp.solve(self.model(fixings))
            if sol.status is lp.LpStatus.INFEASIBLE:
                continue
            if not sol.optimal:
                raise SolverError(f"MILP relaxation ended with status {sol.status.value}")
            if sol.objective_value <= best_eta + 1e-9:
                continue
            frac = [c for c in zcols if c not in fixings and INTEGRALITY_TOL < sol.x[c] < 1.0 - INTEGRALITY_TOL]
            if not frac:
                best_eta, best_x = sol.objective_value, sol.x[: self.n].copy()
                continue
            col = frac[0]
            stack.append({**fixings, col: 0.0})
            stack.append({**fixings, col: 1.0})
        if best_x is None:
            return None
        return best_eta, np.clip(best_x, self.box.lower, self.box.upper)


def _relu_support_cut(problem, support, box) -> Cut:
    s, f_s, g = safe_support(problem, support, box)
    g = np.maximum(g, 0.0)
    return Cut(s, f_s, g, g.copy(), f_s - float(g @ s), box, CutKind.EXACT_RELU)


def exact_cutting_plane(
    problem: OracleProblem,
    box: Optional[BoxBounds] = None,
    epsilon: float = 1e-2,
    opts: Optional[ExactOptions] = None,
) -> CutPlaneResult:
    """Alternate MILP solves and ReLU-cut additions until ``UB - LB <= epsilon``."""
    opts = opts or ExactOptions()
    box = box or problem.box
    if not problem.box.contains_box(box):
        raise DomainError("sub-box is not inside the problem box")
    n = box.n
    max_iter = opts.max_iterations if opts.max_iterations is not None else max(1, opts.binary_budget // n)
    if n * max_iter > opts.binary_budget:
        raise RefusalError(
            f"{n} variables x {max_iter} iterations exceeds the binary budget of {opts.binary_budget}"
        )
    assert_nonnegative_at_lower(problem)

    main = _ExactMain(problem, box)
    main.add_cut(_relu_support_cut(problem, box.midpoint, box))
    lb, ub = -math.inf, math.inf
    incumbent = None
    mid = main.cuts[0].support
    if problem.feasible(mid):
        lb, incumbent = main.cuts[0].f_at_support, mid.copy()

    history = []
    termination = Termination.ITER_LIMIT
    it = 0
    with _trace_writer(opts.trace, n) as writer:
        for it in range(1, max_iter + 1):
            out = main.solve(opts.max_bb_nodes)
            if out is None:
                return CutPlaneResult(-math.inf, -math.inf, None, main.cuts, it, Termination.INFEASIBLE, history)
            eta, x = out
            ub = min(ub, eta)
            f_x = float(problem.value(x))
            if f_x > lb:
                lb, incumbent = f_x, x.copy()
            history.append((lb, ub))
            _trace_row(writer, it, lb, ub, x)
            if ub - lb <= epsilon:
                termination = Termination.ABS_GAP
                break
            if _is_duplicate(x, [c.support for c in main.cuts]):
                termination = Termination.DUPLICATE_CUT
                break
            if it == max_iter:
                break
            main.add_cut(_relu_support_cut(problem, x, box))
    return CutPlaneResult(lb, ub, incumbent, list(main.cuts), it, termination, history)
