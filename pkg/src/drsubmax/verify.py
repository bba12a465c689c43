"""Brute-force oracles for checking solver output on small problems."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import lp
from .model import DomainError, OracleProblem, RefusalError

GRID_GUARD = 10**8
GRID_CHUNK = 200_000
ROW_TOL = lp.ROW_TOL
VERTEX_MAX_VARS = 8
VERTEX_MAX_ROWS = 12
ASSIGNMENT_GUARD = 10**7


class EmptyGridError(DomainError):
    """No lattice point satisfies the linear constraints."""


@dataclass
class GridOracleResult:
    best_x: np.ndarray
    best_value: float
    grid_step: float
    points_evaluated: int
    lipschitz: float = math.inf

    @property
    def slack(self) -> float:
        """Upper bound on ``true max - best_value`` from the Lipschitz estimate."""
        n = self.best_x.size
        return self.lipschitz * self.grid_step * n / 2.0


def grid_axes(lower, upper, step: float) -> list:
    """Per-axis lattices with spacing at most ``step``, endpoints included."""
    if step <= 0:
        raise DomainError("grid step must be positive")
    axes = []
    for lo, hi in zip(lower, upper):
        width = hi - lo
        if width <= 0.0:
            axes.append(np.array([lo]))
            continue
        k = max(1, int(math.ceil(width / step - 1e-9)))
        axes.append(np.linspace(lo, hi, k + 1))
    return axes


def grid_maximize(problem: OracleProblem, step: float, chunk: int = GRID_CHUNK) -> GridOracleResult:
    """Exhaustive maximisation over the box lattice intersected with ``Ax <= b``."""
    axes = grid_axes(problem.box.lower, problem.box.upper, step)
    shape = tuple(a.size for a in axes)
    total = math.prod(shape)
    if total > GRID_GUARD:
        raise RefusalError(f"grid of {total} points exceeds the guard of {GRID_GUARD}")

    A, b = problem.constraints.matrix, problem.constraints.rhs
    best_val, best_x = -math.inf, None
    feasible_seen = 0
    grad_rows = []
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(start + chunk, total)), shape)
        X = np.column_stack([axes[d][idx[d]] for d in range(len(axes))])
        if A.shape[0]:
            X = X[np.all(X @ A.T <= b + ROW_TOL, axis=1)]
        if X.shape[0] == 0:
            continue
        feasible_seen += X.shape[0]
        vals = problem.values(X)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_x = float(vals[k]), X[k].copy()
        grad_rows.append(X[:: max(1, X.shape[0] // 64)])
    if best_x is None:
        raise EmptyGridError("no grid point satisfies the linear constraints")

    sample = np.vstack(grad_rows)
    with np.errstate(all="ignore"):
        G = problem.gradients(sample)
        L = float(np.max(np.linalg.norm(G, axis=1)))
    if not np.isfinite(L):
        L = math.inf
    return GridOracleResult(best_x, best_val, float(step), feasible_seen, L)


def vertex_enumerate_lp(model: lp.LpModel, chunk: int = 50_000) -> lp.LpSolution:
    """Best basic feasible point of a small LP by trying every basis.

    The region is pointed (every variable has a finite lower bound), so it
    is empty exactly when no basis is feasible.  Unbounded models are not
    detected; callers pass bounded LPs.
    """
    nv = model.num_vars
    if nv > VERTEX_MAX_VARS or model.num_rows > VERTEX_MAX_ROWS:
        raise RefusalError("vertex enumeration limited to 8 variables and 12 rows")
    A, senses, rhs = model.row_matrix()
    lo = np.array([bd[0] for bd in model.var_bounds])
    hi = np.array([bd[1] for bd in model.var_bounds])

    # every candidate hyperplane: rows, then lower bounds, then finite upper bounds
    planes = [A[i] for i in range(A.shape[0])] + list(np.eye(nv))
    values = list(rhs) + list(lo)
    for i in np.flatnonzero(np.isfinite(hi)):
        planes.append(np.eye(nv)[i])
        values.append(hi[i])
    P = np.array(planes).reshape(-1, nv)
    q = np.array(values)
    eq_rows = [i for i, s in enumerate(senses) if s == lp.EQ]

    best = None
    combos = itertools.combinations(range(P.shape[0]), nv)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block, dtype=int)
        if eq_rows:
            eq = np.array(eq_rows)
            idx = idx[np.all((idx[:, :, None] == eq[None, None, :]).any(axis=1), axis=1)]
        if idx.size == 0:
            continue
        M = P[idx]
        r = q[idx]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-12
        if not ok.any():
            continue
        X = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
        feas = np.all(X >= lo - lp.BOUND_TOL, axis=1) & np.all(X <= hi + lp.BOUND_TOL, axis=1)
        if A.shape[0]:
            act = X @ A.T
            for i, s in enumerate(senses):
                if s == lp.LE:
                    feas &= act[:, i] <= rhs[i] + ROW_TOL
                elif s == lp.GE:
                    feas &= act[:, i] >= rhs[i] - ROW_TOL
                else:
                    feas &= np.abs(act[:, i] - rhs[i]) <= ROW_TOL
        if not feas.any():
            continue
        X = X[feas]
        obj = X @ model.objective
        k = int(np.argmax(obj))
        if best is None or obj[k] > best[1]:
            best = (X[k], float(obj[k]))
    if best is None:
        return lp.LpSolution(lp.LpStatus.INFEASIBLE)
    return lp.LpSolution(lp.LpStatus.OPTIMAL, best[0], best[1], 0)


def fd_gradient_check(problem: OracleProblem, x, h: float = 1e-5) -> float:
    """Largest relative error between the gradient oracle and central differences.

    The error per component is ``|fd - g| / max(|g|, 1)``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    E = np.eye(n) * h
    X = np.vstack([x + E, x - E])
    vals = problem.values(X)
    fd = (vals[:n] - vals[n:]) / (2.0 * h)
    g = np.asarray(problem.gradient(x), dtype=float)
    return float(np.max(np.abs(fd - g) / np.maximum(np.abs(g), 1.0)))


def enumerate_assignments(coverage, capacity, S, weights=None) -> float:
    """Best integral assignment of demands to the open facilities ``S``.

    Each demand goes to at most one open facility that covers it, and
    facility ``i`` serves at most ``floor(capacity[i])`` demands.  Every
    assignment is tried.
    """
    C = np.asarray(coverage, dtype=bool)
    S = sorted(set(int(i) for i in S))
    n_demand = C.shape[0]
    w = np.ones(n_demand) if weights is None else np.asarray(weights, dtype=float)
    if not S:
        return 0.0
    cap = np.floor(np.asarray(capacity, dtype=float) + 1e-12)
    options = [[-1] + [i for i in S if C[j, i]] for j in range(n_demand)]
    if math.prod(len(o) for o in options) > ASSIGNMENT_GUARD:
        raise RefusalError("too many assignments to enumerate")
    best = 0.0
    for choice in itertools.product(*options):
        load = {}
        total = 0.0
        for j, i in enumerate(choice):
            if i >= 0:
                load[i] = load.get(i, 0) + 1
                total += w[j]
        if total > best and all(load[i] <= cap[i] for i in load):
            best = total
    return best


def min_cut_coverage(coverage, capacity, S) -> float:
    """Capacitated coverage of ``S`` as a minimum cut, found by enumeration.

    Source feeds facility ``i`` with capacity ``K_i``, each covering arc
    carries 1, and each demand drains 1 to the sink.  For fixed source-side
    facilities the best demand side is chosen per demand, so only subsets of
    ``S`` are enumerated.  Fractional capacities are handled exactly.
    """
    C = np.asarray(coverage, dtype=bool)
    S = sorted(set(int(i) for i in S))
    K = np.asarray(capacity, dtype=float)
    if not S:
        return 0.0
    best = math.inf
    for r in range(len(S) + 1):
        for src_side in itertools.combinations(S, r):
            cut = sum(K[i] for i in S if i not in src_side)
            # demand j on the source side pays 1 to the sink, otherwise one per
            # covering arc from a source-side facility
            for j in range(C.shape[0]):
                arcs = sum(1 for i in src_side if C[j, i])
                cut += min(1.0, float(arcs))
            best = min(best, cut)
    return best


# ---------------------------------------------------------------------------
# invariant suite behind ``drsub verify``


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def suite_problems(seed: int = 0) -> dict:
    """One small seeded instance per family, keyed by a readable label."""
    from .problems import build_problem, gen_covering, gen_influence, gen_quadratic

    return {
        "quadratic": build_problem(gen_quadratic(4, 3, seed)),
        "uncap_covering": build_problem(gen_covering(5, 40, 2.0, False, seed)),
        "cap_covering": build_problem(gen_covering(4, 30, 2.0, True, seed)),
        "influence_max": build_problem(gen_influence(6, 2.0, "contest", seed)),
    }


def _random_points(problem, count, rng, margin=0.0):
    lo = problem.box.lower + margin
    hi = problem.box.upper - margin
    return lo + (hi - lo) * rng.random((count, problem.dimension))


def invariant_suite(seed: int = 0, trials: int = 10_000, points: int = 100) -> list:
    """Submodularity, monotonicity, gradient and overestimator checks per family."""
    from .envelopes import envelope_cut
    from .model import check_submodular_sample

    rng = np.random.default_rng(seed)
    out = []
    for label, problem in suite_problems(seed).items():
        rep = check_submodular_sample(problem, trials=trials, rng_seed=seed)
        out.append(CheckResult(f"{label} submodular sample", rep.passed, f"max violation {rep.max_violation:.3g}"))

        X = _random_points(problem, points, rng, margin=2e-5)
        err = max(fd_gradient_check(problem, x) for x in X)
        out.append(CheckResult(f"{label} gradient vs finite differences", err <= 1e-5, f"max rel error {err:.3g}"))

        # overestimator validity on random (x, support) pairs
        S = _random_points(problem, trials, rng)
        Xs = _random_points(problem, trials, rng)
        fS, gS, fX = problem.values(S), problem.gradients(S), problem.values(Xs)
        over = fS + np.sum(gS * np.maximum(Xs - S, 0.0), axis=1)
        worst = float(np.max(fX - over))
        out.append(CheckResult(f"{label} overestimator validity", worst <= 1e-9, f"max F - F~ {worst:.3g}"))

        box = problem.box
        corner = 0.0
        for s in (box.lower, box.upper):
            cut = envelope_cut(problem, s, box)
            corner = max(corner, abs(cut.value(s) - problem.value(s)))
        out.append(CheckResult(f"{label} envelope corner tightness", corner <= 1e-9, f"max corner error {corner:.3g}"))
    return out
