"""Benchmark problem families and small analytic test problems."""

from __future__ import annotations

import numpy as np

from ..model import BoxBounds, DomainError, Instance, LinearConstraints, OracleProblem
from .availability import availability, availability_slope, subset_masks, SetFunctionExtension
from .covering import (
    CoveringInstance,
    covering_grad_cap,
    covering_grad_uncap,
    covering_value_cap,
    covering_value_uncap,
    gen_covering,
    solve_assignment,
)
from .influence import InfluenceInstance, gen_influence, influence_grad, influence_value, reachable_sets
from .quadratic import QuadraticInstance, gen_quadratic, quadratic_from_hessian


def family_of(instance: Instance):
    """Typed family object for an :class:`Instance`."""
    if instance.kind == "quadratic":
        return QuadraticInstance.from_payload(instance.payload)
    if instance.kind in ("uncap_covering", "cap_covering"):
        cov = CoveringInstance.from_payload(instance.payload)
        if cov.capacitated != (instance.kind == "cap_covering"):
            raise DomainError("capacity field does not match instance kind")
        return cov
    if instance.kind == "influence_max":
        return InfluenceInstance.from_payload(instance.payload)
    raise DomainError(f"unknown instance kind {instance.kind!r}")


def build_problem(instance: Instance) -> OracleProblem:
    fam = family_of(instance)
    if fam.n != instance.n:
        raise DomainError("payload dimension does not match n")
    return fam.to_problem()


def sqrt_problem(n: int = 1, budget=None, lower=0.0, upper=1.0) -> OracleProblem:
    """``sum_i sqrt(x_i)`` on a box, optionally with ``sum x <= budget``."""
    def value(x):
        return float(np.sum(np.sqrt(np.asarray(x, dtype=float))))

    def gradient(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return 0.5 / np.sqrt(x)

    box = BoxBounds(np.full(n, lower), np.full(n, upper))
    if budget is None:
        cons = LinearConstraints.empty(n)
    else:
        cons = LinearConstraints(np.ones((1, n)), [budget])
    return OracleProblem(
        value, gradient, box, cons, "sqrt",
        value_batch=lambda X: np.sqrt(np.atleast_2d(X)).sum(axis=1),
    )


def bilinear_problem(budget=None) -> OracleProblem:
    """``x1 + x2 - x1 x2`` on the unit square, the two-variable quadratic toy."""
    H = np.array([[0.0, -1.0], [-1.0, 0.0]])
    if budget is None:
        quad = quadratic_from_hessian(H)
    else:
        quad = quadratic_from_hessian(H, np.ones((1, 2)), [budget])
    return quad.to_problem()


__all__ = [
    "CoveringInstance",
    "InfluenceInstance",
    "QuadraticInstance",
    "SetFunctionExtension",
    "availability",
    "availability_slope",
    "bilinear_problem",
    "build_problem",
    "covering_grad_cap",
    "covering_grad_uncap",
    "covering_value_cap",
    "covering_value_uncap",
    "family_of",
    "gen_covering",
    "gen_influence",
    "gen_quadratic",
    "influence_grad",
    "influence_value",
    "quadratic_from_hessian",
    "reachable_sets",
    "solve_assignment",
    "sqrt_problem",
    "subset_masks",
]
