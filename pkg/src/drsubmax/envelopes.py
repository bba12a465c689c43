"""First-order overestimators of monotone DR-submodular functions.

Two kinds of affine-or-piecewise bounds are built from a single support
point ``s`` with value ``F(s)`` and gradient ``g = grad F(s)``:

* the ReLU overestimator ``F(s) + g . max(x - s, 0)``, valid on the whole
  domain but non-concave;
* its concave envelope over a box ``[l, u]``, which is affine:
  ``F(s) + (g * (u - s) / (u - l)) . (x - l)``.  These are the LP cuts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import BOX_TOL, BoxBounds, DomainError, OracleProblem


class CutKind(str, enum.Enum):
    EXACT_RELU = "exact_relu"
    ENVELOPE = "envelope"


@dataclass(frozen=True)
class Cut:
    support: np.ndarray
    f_at_support: float
    grad_at_support: np.ndarray
    coeffs: np.ndarray
    intercept: float
    box: BoxBounds
    kind: CutKind = CutKind.ENVELOPE

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind is CutKind.ENVELOPE:
            # anchored at the lower corner so value(l) == F(s) exactly
            return float(self.f_at_support + self.coeffs @ (x - self.box.lower))
        return float(self.f_at_support + _relu_term(self.grad_at_support, x - self.support))

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind is CutKind.ENVELOPE:
            return self.f_at_support + (X - self.box.lower) @ self.coeffs
        pos = np.maximum(X - self.support, 0.0)
        g = self.grad_at_support
        return self.f_at_support + np.where(pos > 0.0, pos * g, 0.0).sum(axis=1)


def _relu_term(grad, diff) -> float:
    pos = np.maximum(diff, 0.0)
    mask = pos > 0.0
    return float(grad[mask] @ pos[mask])


def _check_in_box(x, box: BoxBounds, what: str):
    if not box.contains(x, BOX_TOL):
        raise DomainError(f"{what} lies outside the box")


def overestimator_value(problem: OracleProblem, x, support) -> float:
    x = np.asarray(x, dtype=float)
    s = np.asarray(support, dtype=float)
    _check_in_box(x, problem.box, "x")
    _check_in_box(s, problem.box, "support")
    return float(problem.value(s)) + _relu_term(np.asarray(problem.gradient(s), dtype=float), x - s)


def _envelope_scale(support, box: BoxBounds) -> np.ndarray:
    """Per-axis factor ``(u - s) / (u - l)``; 0 on zero-width axes."""
    width = box.width
    scale = np.zeros_like(width)
    wide = width > 0.0
    scale[wide] = (box.upper[wide] - support[wide]) / width[wide]
    return np.clip(scale, 0.0, 1.0)


def clamped_gradient(problem: OracleProblem, support) -> np.ndarray:
    g = np.asarray(problem.gradient(np.asarray(support, dtype=float)), dtype=float)
    return np.maximum(g, 0.0)


def envelope_from_data(support, f_s: float, grad, box: BoxBounds) -> Cut:
    s = np.asarray(support, dtype=float)
    g = np.maximum(np.asarray(grad, dtype=float), 0.0)
    scale = _envelope_scale(s, box)
    coeffs = np.zeros_like(g)
    active = scale > 0.0
    coeffs[active] = g[active] * scale[active]
    intercept = float(f_s - coeffs @ box.lower)
    return Cut(s.copy(), float(f_s), g, coeffs, intercept, box, CutKind.ENVELOPE)


def envelope_cut(problem: OracleProblem, support, box: BoxBounds) -> Cut:
    """Affine concave envelope over ``box`` of the ReLU overestimator at ``support``."""
    s = np.asarray(support, dtype=float)
    _check_in_box(s, box, "support")
    return envelope_from_data(s, float(problem.value(s)), problem.gradient(s), box)


def relu_cut(problem: OracleProblem, support, box: BoxBounds) -> Cut:
    s = np.asarray(support, dtype=float)
    _check_in_box(s, box, "support")
    g = clamped_gradient(problem, s)
    f_s = float(problem.value(s))
    return Cut(s.copy(), f_s, g, g.copy(), f_s - float(g @ s), box, CutKind.EXACT_RELU)


def single_cut_error_bound(problem: OracleProblem, support, box: BoxBounds) -> float:
    """Largest gap between the envelope cut and the ReLU overestimator.

    The gap is separable and peaks at ``x = support``.
    """
    s = np.asarray(support, dtype=float)
    _check_in_box(s, box, "support")
    g = clamped_gradient(problem, s)
    scale = _envelope_scale(s, box)
    dist = s - box.lower
    mask = (scale > 0.0) & (dist > 0.0)
    return float(g[mask] @ (scale[mask] * dist[mask]))


def coarse_error_bound(problem: OracleProblem, support, box: BoxBounds) -> float:
    s = np.asarray(support, dtype=float)
    _check_in_box(s, box, "support")
    g = clamped_gradient(problem, s)
    w = box.width
    mask = w > 0.0
    return float(g[mask] @ w[mask])
