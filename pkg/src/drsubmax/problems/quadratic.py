"""Non-concave quadratic ``h.x + x.H.x / 2 + c`` with ``H <= 0`` elementwise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import BoxBounds, DomainError, Instance, LinearConstraints, OracleProblem


@dataclass(frozen=True)
class QuadraticInstance:
    H: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        n = H.shape[0]
        if H.shape != (n, n) or not np.allclose(H, H.T, atol=0.0):
            raise DomainError("H must be a symmetric square matrix")
        if np.any(H > 0.0):
            raise DomainError("H must be elementwise non-positive")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float).reshape(n))
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float).reshape(-1, n))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))

    @property
    def n(self) -> int:
        return self.H.shape[0]

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.h @ x + 0.5 * x @ self.H @ x + self.c)

    def gradient(self, x) -> np.ndarray:
        return self.h + self.H @ np.asarray(x, dtype=float)

    def value_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return X @ self.h + 0.5 * np.einsum("ki,ij,kj->k", X, self.H, X) + self.c

    def gradient_batch(self, X) -> np.ndarray:
        return self.h + np.atleast_2d(X) @ self.H

    def to_problem(self) -> OracleProblem:
        return OracleProblem(
            value=self.value,
            gradient=self.gradient,
            box=BoxBounds.unit(self.n),
            constraints=LinearConstraints(self.A, self.b),
            name="quadratic",
            value_batch=self.value_batch,
            gradient_batch=self.gradient_batch,
        )

    def payload(self) -> dict:
        return {"H": self.H, "h": self.h, "A": self.A, "b": self.b, "c": float(self.c)}

    @classmethod
    def from_payload(cls, payload: dict) -> "QuadraticInstance":
        return cls(payload["H"], payload["h"], payload["A"], payload["b"], payload.get("c", 0.0))


def quadratic_from_hessian(H, A=None, b=None) -> QuadraticInstance:
    """Instance with ``h = -H^T 1`` so the gradient vanishes at the upper corner."""
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    A = np.zeros((0, n)) if A is None else A
    b = np.zeros(0) if b is None else b
    return QuadraticInstance(H, -H.T @ np.ones(n), A, b)


def gen_quadratic(n: int, m: int, seed: int) -> Instance:
    if n < 1 or m < 1:
        raise DomainError("n and m must be positive")
    rng = np.random.default_rng(seed)
    R = rng.uniform(-1.0, 0.0, size=(n, n))
    H = np.triu(R) + np.triu(R, 1).T
    A = rng.uniform(0.0, 1.0, size=(m, n))
    quad = quadratic_from_hessian(H, A, np.ones(m))
    return Instance("quadratic", seed, n, 1.0, quad.payload())
