"""Dense bounded-variable primal simplex.

Small and deterministic on purpose: the main problems solved here have a
handful of structural columns and at most a few hundred rows.  Pivoting
uses Bland's rule (lowest index enters, lowest index leaves on ties), so
identical models always produce bit-identical answers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import DomainError

LE, GE, EQ = "<=", ">=", "=="
_SENSES = (LE, GE, EQ)

PIVOT_TOL = 1e-9
FEAS_SLACK = 1e-10
COST_TOL = 1e-9
ROW_TOL = 1e-7
BOUND_TOL = 1e-9
REFACTOR_EVERY = 50


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FAILED = "failed"


@dataclass(frozen=True)
class LpModel:
    """``max c^T v`` subject to rows ``a^T v (<=|>=|==) rhs`` and bounds."""

    objective: np.ndarray
    rows: tuple = ()
    var_bounds: tuple = ()

    def __post_init__(self):
        c = np.array(self.objective, dtype=float).reshape(-1)
        object.__setattr__(self, "objective", c)
        bounds = tuple(self.var_bounds) or tuple((0.0, np.inf) for _ in range(c.size))
        if len(bounds) != c.size:
            raise DomainError("one (lo, hi) pair is needed per variable")
        for lo, hi in bounds:
            if not np.isfinite(lo):
                raise DomainError("lower bounds must be finite")
            if lo > hi:
                raise DomainError("variable lower bound exceeds upper bound")
        object.__setattr__(self, "var_bounds", tuple((float(lo), float(hi)) for lo, hi in bounds))
        rows = []
        for coeffs, sense, rhs in self.rows:
            coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
            if coeffs.size != c.size:
                raise DomainError("row length does not match objective length")
            if sense not in _SENSES:
                raise DomainError(f"unknown row sense {sense!r}")
            rows.append((coeffs, sense, float(rhs)))
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def row_matrix(self):
        if not self.rows:
            return np.zeros((0, self.num_vars)), [], np.zeros(0)
        A = np.vstack([r[0] for r in self.rows])
        return A, [r[1] for r in self.rows], np.array([r[2] for r in self.rows])


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def add_row(model: LpModel, coeffs, sense: str, rhs: float) -> LpModel:
    """Return a copy of ``model`` with one extra row."""
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    if coeffs.size != model.num_vars:
        raise DomainError("row length does not match model")
    return LpModel(model.objective, model.rows + ((coeffs, sense, rhs),), model.var_bounds)


def add_rows(model: LpModel, rows: Sequence) -> LpModel:
    return LpModel(model.objective, model.rows + tuple(rows), model.var_bounds)


class _Breakdown(Exception):
    pass


class _Tableau:
    """Working state of the bounded simplex on ``M y = r``, ``0 <= y <= ub``.

    Only the nonbasic columns of ``B^-1 M`` are stored (``T`` is ``m x (N-m)``),
    so a pivot costs ``O(m (N-m))``.  The main problems here have many rows
    and few structural columns, which makes this the cheap side.
    """

    def __init__(self, M, r, ub, basis):
        self.M = M
        self.r = r
        self.ub = ub
        self.m, self.N = M.shape
        self.basis = np.array(basis, dtype=int)
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.nb = np.flatnonzero(~self.is_basic)
        self.at_upper = np.zeros(self.N, dtype=bool)
        self.pivots = 0
        if np.array_equal(M[:, self.basis], np.eye(self.m)):
            # all-slack start: nothing to factor
            self.T = M[:, self.nb].copy()
            self.beta = r - M @ self.nonbasic_values()
        else:
            self.refactor()

    def nonbasic_values(self):
        y = np.where(self.at_upper, self.ub, 0.0)
        y[self.is_basic] = 0.0
        return y

    def refactor(self):
        B = self.M[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.M[:, self.nb])
            self.beta = np.linalg.solve(B, self.r - self.M @ self.nonbasic_values())
        except np.linalg.LinAlgError as exc:
            raise _Breakdown("singular basis") from exc

    def values(self):
        y = self.nonbasic_values()
        y[self.basis] = self.beta
        return y

    def optimise(self, cost, max_iter):
        """Run primal simplex iterations; returns 'optimal' or 'unbounded'."""
        for _ in range(max_iter):
            nb = self.nb
            d = cost[nb] - cost[self.basis] @ self.T
            upper = self.at_upper[nb]
            up = ~upper & (d > COST_TOL) & (self.ub[nb] > 0.0)
            down = upper & (d < -COST_TOL)
            cand = np.flatnonzero(up | down)
            if cand.size == 0:
                return "optimal"
            q = int(cand[np.argmin(nb[cand])])  # Bland: lowest variable index
            j = int(nb[q])
            direction = 1.0 if up[q] else -1.0
            col = direction * self.T[:, q]

            t_best = self.ub[j]
            leave = -1
            leave_to_upper = False
            basic_ub = self.ub[self.basis]
            pos = col > PIVOT_TOL
            neg = (col < -PIVOT_TOL) & np.isfinite(basic_ub)
            if pos.any() or neg.any():
                # two-pass ratio test: relax bounds by FEAS_SLACK to find the
                # step limit, then take the largest pivot within it
                room = np.full(self.m, np.inf)
                room[pos] = self.beta[pos]
                room[neg] = basic_ub[neg] - self.beta[neg]
                step = np.abs(col)
                limit = np.min((room[pos | neg] + FEAS_SLACK) / step[pos | neg])
                if limit < t_best:
                    ok = np.flatnonzero((pos | neg) & (room / np.where(step > 0, step, 1.0) <= limit))
                    best = ok[step[ok] >= 0.5 * step[ok].max()]
                    leave = int(best[np.argmin(self.basis[best])])
                    t_best = max(room[leave] / step[leave], 0.0)
                    leave_to_upper = bool(neg[leave])
            if not np.isfinite(t_best):
                return "unbounded"

            self.beta -= t_best * col
            if leave < 0:
                # bound flip, no basis change
                self.at_upper[j] = not self.at_upper[j]
                continue

            entering_value = (self.ub[j] if self.at_upper[j] else 0.0) + direction * t_best
            piv = self.T[leave, q]
            if abs(piv) < PIVOT_TOL:
                raise _Breakdown("pivot below tolerance")
            out = int(self.basis[leave])
            # exchange basic ``out`` and nonbasic ``j`` in the condensed tableau
            pcol = self.T[:, q].copy()
            prow = self.T[leave] / piv
            self.T -= np.outer(pcol, prow)
            self.T[leave] = prow
            self.T[:, q] = -pcol / piv
            self.T[leave, q] = 1.0 / piv
            self.basis[leave] = j
            self.nb[q] = out
            self.is_basic[j] = True
            self.is_basic[out] = False
            self.at_upper[j] = False
            self.at_upper[out] = leave_to_upper
            self.beta[leave] = entering_value
            self.pivots += 1
            if self.pivots % REFACTOR_EVERY == 0:
                self.refactor()
        raise _Breakdown("iteration limit")


def solve(model: LpModel, max_iter: int = 100_000) -> LpSolution:
    """Solve ``model`` to a vertex optimum.

    Returns ``FAILED`` rather than a wrong answer when the factorisation
    breaks down or the final point does not verify.
    """
    c = model.objective
    nv = c.size
    A, senses, rhs = model.row_matrix()
    lo = np.array([b[0] for b in model.var_bounds])
    hi = np.array([b[1] for b in model.var_bounds])
    m = A.shape[0]

    if m == 0:
        if np.any((c > 0) & ~np.isfinite(hi)):
            return LpSolution(LpStatus.UNBOUNDED)
        x = np.where(c > 0, hi, lo)
        return LpSolution(LpStatus.OPTIMAL, x, float(c @ x), 0)

    r = rhs - A @ lo
    slack_sign = np.array([1.0 if s == LE else -1.0 if s == GE else 0.0 for s in senses])
    flip = np.where(r < 0, -1.0, 1.0)
    A_rows = A * flip[:, None]
    r = r * flip
    slack_sign = slack_sign * flip

    slack_rows = np.flatnonzero(slack_sign != 0)
    art_rows = np.flatnonzero(slack_sign <= 0)
    ns, na = slack_rows.size, art_rows.size
    N = nv + ns + na
    M = np.zeros((m, N))
    M[:, :nv] = A_rows
    M[slack_rows, nv + np.arange(ns)] = slack_sign[slack_rows]
    M[art_rows, nv + ns + np.arange(na)] = 1.0
    ub = np.concatenate([hi - lo, np.full(ns, np.inf), np.full(na, np.inf)])

    basis = np.empty(m, dtype=int)
    slack_col = {int(row): nv + k for k, row in enumerate(slack_rows)}
    art_col = {int(row): nv + ns + k for k, row in enumerate(art_rows)}
    for i in range(m):
        basis[i] = art_col[i] if i in art_col else slack_col[i]

    iterations = 0
    try:
        tab = _Tableau(M, r, ub, basis)
        if na:
            phase1 = np.zeros(N)
            phase1[nv + ns:] = -1.0
            tab.optimise(phase1, max_iter)
            tab.refactor()
            infeas = float(np.sum(tab.values()[nv + ns:]))
            if infeas > ROW_TOL * max(1.0, float(np.max(np.abs(r), initial=0.0))):
                return LpSolution(LpStatus.INFEASIBLE, iterations=tab.pivots)
            tab.ub = ub.copy()
            tab.ub[nv + ns:] = 0.0
            tab.at_upper[nv + ns:] = False
            tab.refactor()
        cost = np.zeros(N)
        cost[:nv] = c
        outcome = tab.optimise(cost, max_iter)
        iterations = tab.pivots
        if outcome == "unbounded":
            return LpSolution(LpStatus.UNBOUNDED, iterations=iterations)
        sol = _verified(tab, A, senses, rhs, lo, hi, ub, c, iterations)
        if sol is None and tab.pivots % REFACTOR_EVERY:
            # drift since the last factorisation; recompute and check again
            tab.refactor()
            sol = _verified(tab, A, senses, rhs, lo, hi, ub, c, iterations)
    except _Breakdown:
        return LpSolution(LpStatus.FAILED, iterations=iterations)
    return sol if sol is not None else LpSolution(LpStatus.FAILED, iterations=iterations)


def _verified(tab, A, senses, rhs, lo, hi, ub, c, iterations):
    """The tableau point as a solution, or None if it breaks a row or bound."""
    nv = c.size
    y = tab.values()
    if np.any(y < -BOUND_TOL) or np.any(y > ub + BOUND_TOL):
        return None
    x = np.clip(lo + y[:nv], lo, hi)
    if A.shape[0]:
        act = A @ x
        sense = np.array(senses)
        bad = (
            ((sense == LE) & (act - rhs > ROW_TOL))
            | ((sense == GE) & (rhs - act > ROW_TOL))
            | ((sense == EQ) & (np.abs(act - rhs) > ROW_TOL))
        )
        if np.any(bad):
            return None
    return LpSolution(LpStatus.OPTIMAL, x, float(c @ x), iterations)
