"""Grey-box problem contract shared by every solver.

An :class:`OracleProblem` bundles a value oracle, a gradient oracle, a box
and a linear system ``A x <= b``.  Solvers never look inside the objective;
they only call the two oracles.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

log = logging.getLogger(__name__)

# Centralised tolerances.
FEAS_TOL = 1e-9
ORACLE_TOL = 1e-7
FD_TOL = 1e-5
BOX_TOL = 1e-12
MONOTONE_TOL = 1e-9


class DomainError(ValueError):
    """Raised when an input lies outside the domain of an operation."""


class RefusalError(RuntimeError):
    """Raised when a request exceeds a configured size guard."""


@dataclass(frozen=True)
class BoxBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise DomainError("lower and upper bounds differ in length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise DomainError("box bounds must be finite")
        if np.any(lo > hi):
            raise DomainError("lower bound exceeds upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, n: int) -> "BoxBounds":
        return cls(np.zeros(n), np.ones(n))

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x, tol: float = BOX_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def contains_box(self, other: "BoxBounds", tol: float = BOX_TOL) -> bool:
        return self.contains(other.lower, tol) and self.contains(other.upper, tol)

    def replace(self, i: int, lo: float, hi: float) -> "BoxBounds":
        lower = self.lower.copy()
        upper = self.upper.copy()
        lower[i] = lo
        upper[i] = hi
        return BoxBounds(lower, upper)


@dataclass(frozen=True)
class LinearConstraints:
    matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        rhs = np.array(self.rhs, dtype=float).reshape(-1)
        A = np.array(self.matrix, dtype=float)
        if A.ndim == 1 and A.size == 0:
            A = A.reshape(0, 0)
        if A.ndim != 2 or A.shape[0] != rhs.size:
            raise DomainError("constraint matrix rows must match rhs length")
        A.setflags(write=False)
        rhs.setflags(write=False)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "rhs", rhs)

    @classmethod
    def empty(cls, n: int) -> "LinearConstraints":
        return cls(np.zeros((0, n)), np.zeros(0))

    @property
    def m(self) -> int:
        return self.rhs.size

    def violation(self, x) -> float:
        """Largest amount by which ``A x <= b`` is violated (0 if satisfied)."""
        if self.m == 0:
            return 0.0
        return float(max(0.0, np.max(self.matrix @ np.asarray(x, dtype=float) - self.rhs)))

    def satisfied(self, x, tol: float = ORACLE_TOL) -> bool:
        return self.violation(x) <= tol


@dataclass(frozen=True)
class OracleProblem:
    """Maximise ``value(x)`` over ``box`` intersected with ``constraints``.

    ``value_batch`` / ``gradient_batch`` are optional vectorised versions that
    take a ``(k, n)`` array; verification helpers use them when present.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    box: BoxBounds
    constraints: LinearConstraints
    name: str = "problem"
    value_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    gradient_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.constraints.matrix.shape[1] != self.box.n and self.constraints.m:
            raise DomainError("constraint matrix width does not match box dimension")

    @property
    def dimension(self) -> int:
        return self.box.n

    def feasible(self, x, tol: float = ORACLE_TOL) -> bool:
        return self.box.contains(x, tol) and self.constraints.satisfied(x, tol)

    def values(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.value_batch is not None:
            return np.asarray(self.value_batch(X), dtype=float)
        return np.array([self.value(x) for x in X], dtype=float)

    def gradients(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.gradient_batch is not None:
            return np.asarray(self.gradient_batch(X), dtype=float)
        return np.array([self.gradient(x) for x in X], dtype=float)


def evaluate(problem: OracleProblem, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dimension,):
        raise DomainError(f"expected a vector of length {problem.dimension}")
    if not problem.box.contains(x, BOX_TOL):
        raise DomainError("point lies outside the box")
    return float(problem.value(x))


def assert_nonnegative_at_lower(problem: OracleProblem) -> float:
    """Cutting-plane LPs bound ``eta >= 0``, which needs ``F(l) >= 0``."""
    f_lo = float(problem.value(problem.box.lower))
    if not math.isfinite(f_lo):
        raise DomainError("objective is not finite at the lower corner")
    if f_lo < -FEAS_TOL:
        raise DomainError(f"objective is negative at the lower corner ({f_lo:.6g})")
    return f_lo


def project_into_box(x, box: BoxBounds) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (box.n,):
        raise DomainError("vector length does not match box")
    return np.clip(x, box.lower, box.upper)


@dataclass
class SubmodularityReport:
    trials: int
    lattice_violation: float
    concavity_violation: float
    monotone_violation: float
    passed: bool

    @property
    def max_violation(self) -> float:
        return max(self.lattice_violation, self.concavity_violation)


def check_submodular_sample(problem: OracleProblem, trials: int = 1000, rng_seed: int = 0) -> SubmodularityReport:
    """Sample-based test of the lattice inequality and axis-wise concavity.

    Also records the most negative gradient entry seen (monotonicity), which
    is reported but does not affect ``passed``.
    """
    if trials < 1:
        raise DomainError("trials must be positive")
    rng = np.random.default_rng(rng_seed)
    box = problem.box
    n = box.n
    w = box.width
    X = box.lower + rng.random((trials, n)) * w
    Y = box.lower + rng.random((trials, n)) * w

    fx = problem.values(X)
    fy = problem.values(Y)
    fmax = problem.values(np.maximum(X, Y))
    fmin = problem.values(np.minimum(X, Y))
    lattice = float(max(0.0, np.max(fmax + fmin - fx - fy)))

    # second difference along a random axis: f(z) - 2 f(z + d e_i) + f(z + 2 d e_i) <= 0
    axis = rng.integers(0, n, size=trials)
    rows = np.arange(trials)
    step = rng.random(trials) * w[axis] / 2.0
    Z = box.lower + rng.random((trials, n)) * w
    Z[rows, axis] = box.lower[axis] + rng.random(trials) * (w[axis] - 2.0 * step)
    Z1 = Z.copy()
    Z1[rows, axis] += step
    Z2 = Z1.copy()
    Z2[rows, axis] += step
    Z2 = np.minimum(Z2, box.upper)
    second = problem.values(Z) - 2.0 * problem.values(Z1) + problem.values(Z2)
    concavity = float(max(0.0, np.max(second)))

    grads = problem.gradients(X[: min(trials, 1000)])
    monotone = float(max(0.0, -np.min(grads)))

    passed = max(lattice, concavity) <= ORACLE_TOL
    if not passed:
        log.warning(
            "%s: sampled submodularity check failed (lattice %.3g, concavity %.3g); "
            "solver guarantees do not apply",
            problem.name, lattice, concavity,
        )
    return SubmodularityReport(trials, lattice, concavity, monotone, passed)


# ---------------------------------------------------------------------------
# serialisable instances

INSTANCE_KINDS = ("quadratic", "uncap_covering", "cap_covering", "influence_max")


def _format_float(v: float) -> str:
    if not math.isfinite(v):
        raise DomainError("non-finite float cannot be serialised")
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _dump(obj: Any) -> str:
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _dump(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_dump(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass(frozen=True)
class Instance:
    """A benchmark instance: family tag plus the data needed to rebuild it."""

    kind: str
    seed: int
    n: int
    budget: float
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in INSTANCE_KINDS:
            raise DomainError(f"unknown instance kind {self.kind!r}")
        if self.n < 1:
            raise DomainError("dimension must be positive")

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "seed": int(self.seed),
            "n": int(self.n),
            "budget": float(self.budget),
            "payload": self.payload,
        }
        return _dump(doc) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        doc = json.loads(text)
        missing = {"kind", "seed", "n", "budget", "payload"} - set(doc)
        if missing:
            raise DomainError(f"instance JSON missing fields: {sorted(missing)}")
        return cls(doc["kind"], int(doc["seed"]), int(doc["n"]), float(doc["budget"]), doc["payload"])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_problem(self) -> OracleProblem:
        from .problems import build_problem

        return build_problem(self)
