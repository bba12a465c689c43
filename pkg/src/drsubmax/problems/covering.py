"""Maximum covering facility defense, uncapacitated and capacitated."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .. import lp
from ..model import BoxBounds, DomainError, Instance, LinearConstraints, OracleProblem, RefusalError
from .availability import (
    ENUMERATION_GUARD,
    G_KINDS,
    SetFunctionExtension,
    availability,
    availability_slope,
    multilinear_gradient,
)

DEFAULT_DBAR = 0.2
DEFAULT_ALPHA = 0.1


@dataclass(frozen=True, eq=False)
class CoveringInstance:
    facility_xy: np.ndarray
    demand_xy: np.ndarray
    weights: np.ndarray
    dbar: float
    budget: float
    a: np.ndarray
    capacity: Optional[np.ndarray] = None
    g_kind: str = "contest"

    def __post_init__(self):
        fac = np.asarray(self.facility_xy, dtype=float).reshape(-1, 2)
        dem = np.asarray(self.demand_xy, dtype=float).reshape(-1, 2)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if w.size != dem.shape[0]:
            raise DomainError("one weight per demand point is required")
        if a.size != fac.shape[0]:
            raise DomainError("one contest parameter per facility is required")
        if self.g_kind not in G_KINDS:
            raise DomainError(f"unknown availability kind {self.g_kind!r}")
        if self.g_kind == "contest" and np.any(a <= 0.0):
            raise DomainError("contest parameters must be positive")
        object.__setattr__(self, "facility_xy", fac)
        object.__setattr__(self, "demand_xy", dem)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "a", a)
        if self.capacity is not None:
            K = np.asarray(self.capacity, dtype=float).reshape(-1)
            if K.size != fac.shape[0] or np.any(K <= 0.0):
                raise DomainError("capacities must be positive, one per facility")
            object.__setattr__(self, "capacity", K)

    @property
    def n(self) -> int:
        return self.facility_xy.shape[0]

    @property
    def capacitated(self) -> bool:
        return self.capacity is not None

    @cached_property
    def coverage(self) -> np.ndarray:
        """``coverage[j, i]`` is True when facility ``i`` covers demand ``j``."""
        d = np.linalg.norm(self.demand_xy[:, None, :] - self.facility_xy[None, :, :], axis=2)
        return d <= self.dbar

    def covering_sets(self) -> list:
        """``I_j`` for each demand point."""
        return [np.flatnonzero(row) for row in self.coverage]

    # -- uncapacitated closed form ------------------------------------------
    def _uncap_value_of_g(self, G, chunk: int = 1024) -> np.ndarray:
        G = np.atleast_2d(G)
        C = self.coverage
        out = np.empty(G.shape[0])
        for start in range(0, G.shape[0], chunk):
            Q = 1.0 - G[start : start + chunk]
            miss = np.prod(np.where(C[None, :, :], Q[:, None, :], 1.0), axis=2)
            out[start : start + chunk] = (1.0 - miss) @ self.weights
        return out

    def uncap_value_batch(self, X) -> np.ndarray:
        return self._uncap_value_of_g(availability(np.atleast_2d(X), self.g_kind, self.a))

    def uncap_gradient_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        G = availability(X, self.g_kind, self.a)
        return multilinear_gradient(self._uncap_value_of_g, G, availability_slope(X, self.g_kind, self.a))

    # -- capacitated via assignment + power set -----------------------------
    @cached_property
    def set_values(self) -> np.ndarray:
        """``f(S)`` for every subset, memoised at first use."""
        if self.n > ENUMERATION_GUARD:
            raise RefusalError(f"capacitated covering limited to n <= {ENUMERATION_GUARD}")
        return np.array([solve_assignment(self, _members(S, self.n)) for S in range(2**self.n)])

    @cached_property
    def extension(self) -> SetFunctionExtension:
        return SetFunctionExtension(self.set_values, self.g_kind, self.a)

    def payload(self) -> dict:
        doc = {
            "facility_xy": self.facility_xy,
            "demand_xy": self.demand_xy,
            "weights": self.weights,
            "dbar": float(self.dbar),
            "budget": float(self.budget),
            "a": self.a,
            "g_kind": self.g_kind,
        }
        if self.capacity is not None:
            doc["K"] = self.capacity
        return doc

    @classmethod
    def from_payload(cls, payload: dict) -> "CoveringInstance":
        return cls(
            payload["facility_xy"],
            payload["demand_xy"],
            payload["weights"],
            payload["dbar"],
            payload["budget"],
            payload["a"],
            payload.get("K"),
            payload.get("g_kind", "contest"),
        )

    def to_problem(self) -> OracleProblem:
        n = self.n
        box = BoxBounds.unit(n)
        budget_row = LinearConstraints(np.ones((1, n)), [self.budget])
        if self.capacitated:
            ext = self.extension
            return OracleProblem(
                ext.value, ext.gradient, box, budget_row, "cap_covering", ext.value_batch, ext.gradient_batch
            )
        return OracleProblem(
            value=lambda x: float(self.uncap_value_batch(np.asarray(x)[None, :])[0]),
            gradient=lambda x: self.uncap_gradient_batch(np.asarray(x)[None, :])[0],
            box=box,
            constraints=budget_row,
            name="uncap_covering",
            value_batch=self.uncap_value_batch,
            gradient_batch=self.uncap_gradient_batch,
        )


def _members(S: int, n: int) -> list:
    return [i for i in range(n) if (S >> i) & 1]


def covering_value_uncap(inst: CoveringInstance, x) -> float:
    return float(inst.uncap_value_batch(np.asarray(x, dtype=float)[None, :])[0])


def covering_grad_uncap(inst: CoveringInstance, x) -> np.ndarray:
    return inst.uncap_gradient_batch(np.asarray(x, dtype=float)[None, :])[0]


def covering_value_cap(inst: CoveringInstance, x) -> float:
    return inst.extension.value(x)


def covering_grad_cap(inst: CoveringInstance, x) -> np.ndarray:
    return inst.extension.gradient(x)


def solve_assignment(inst: CoveringInstance, S) -> float:
    """Covered demand weight when only facilities in ``S`` are open.

    Each demand counts at most once in total; open facilities serve at most
    ``K_i`` demand.  Without capacities this is plain set coverage.
    """
    S = sorted(set(int(i) for i in S))
    if not S:
        return 0.0
    C = inst.coverage
    if inst.capacity is None:
        return float(inst.weights[C[:, S].any(axis=1)].sum())

    pairs = [(i, j) for i in S for j in np.flatnonzero(C[:, i])]
    if not pairs:
        return 0.0
    nv = len(pairs)
    objective = np.array([inst.weights[j] for _, j in pairs])
    rows = []
    for i in S:
        coeffs = np.array([1.0 if pi == i else 0.0 for pi, _ in pairs])
        if coeffs.any():
            rows.append((coeffs, lp.LE, inst.capacity[i]))
    for j in sorted({j for _, j in pairs}):
        coeffs = np.array([1.0 if pj == j else 0.0 for _, pj in pairs])
        if coeffs.sum() > 1:
            rows.append((coeffs, lp.LE, 1.0))
    model = lp.LpModel(objective, tuple(rows), tuple((0.0, 1.0) for _ in range(nv)))
    sol = lp.solve(model)
    if not sol.optimal:
        raise RuntimeError(f"assignment LP ended with status {sol.status.value}")
    return sol.objective_value


def gen_covering(
    n: int,
    n_demand: int,
    budget: float,
    capacitated: bool,
    seed: int,
    g_kind: str = "contest",
    dbar: float = DEFAULT_DBAR,
    alpha: float = DEFAULT_ALPHA,
) -> Instance:
    if n < 1 or n_demand < 1:
        raise DomainError("sizes must be positive")
    rng = np.random.default_rng(seed)
    facility = rng.random((n, 2))
    demand = rng.random((n_demand, 2))
    a = np.full(n, budget / n)
    K = np.full(n, n_demand / ((1.0 - alpha) * n)) if capacitated else None
    inst = CoveringInstance(facility, demand, np.ones(n_demand), dbar, budget, a, K, g_kind)
    kind = "cap_covering" if capacitated else "uncap_covering"
    return Instance(kind, seed, n, float(budget), inst.payload())
