"""Availability functions ``g_i(x_i)`` and multilinear bookkeeping."""

from __future__ import annotations

import numpy as np

from ..model import DomainError, RefusalError

G_KINDS = ("identity", "contest")
ENUMERATION_GUARD = 12


def availability(x, g_kind: str, a=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if g_kind == "identity":
        return x.copy()
    if g_kind == "contest":
        return x / (x + a)
    raise DomainError(f"unknown availability kind {g_kind!r}")


def availability_slope(x, g_kind: str, a=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if g_kind == "identity":
        return np.ones_like(x)
    if g_kind == "contest":
        return a / (x + a) ** 2
    raise DomainError(f"unknown availability kind {g_kind!r}")


def subset_masks(n: int) -> np.ndarray:
    """``(2**n, n)`` boolean matrix; row ``S`` has bit ``i`` of ``S`` in column ``i``."""
    idx = np.arange(2**n)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def subset_probabilities(G: np.ndarray) -> np.ndarray:
    """Probability of each availability pattern for rows of ``G`` (shape ``(k, 2**n)``)."""
    G = np.atleast_2d(G)
    W = np.ones((G.shape[0], 1))
    for i in range(G.shape[1]):
        gi = G[:, i : i + 1]
        W = np.concatenate([W * (1.0 - gi), W * gi], axis=1)
    return W


def multilinear_gradient(value_of_g, G: np.ndarray, slope: np.ndarray) -> np.ndarray:
    """Chain rule for a function that is affine in each ``g_i`` separately.

    ``dF/dx_i = g_i'(x_i) * (F|g_i=1 - F|g_i=0)``; exact, no division.
    """
    G = np.atleast_2d(G)
    out = np.empty_like(G)
    for i in range(G.shape[1]):
        hi = G.copy()
        hi[:, i] = 1.0
        lo = G.copy()
        lo[:, i] = 0.0
        out[:, i] = value_of_g(hi) - value_of_g(lo)
    return out * np.atleast_2d(slope)


class SetFunctionExtension:
    """Generalised multilinear extension of a tabulated set function.

    ``table[S]`` holds ``f(S)`` with ``S`` encoded as a bitmask.
    """

    def __init__(self, table, g_kind: str, a=None, chunk: int = 2048):
        table = np.asarray(table, dtype=float)
        n = int(round(np.log2(table.size)))
        if 2**n != table.size:
            raise DomainError("set-function table length must be a power of two")
        if n > ENUMERATION_GUARD:
            raise RefusalError(f"power-set enumeration limited to n <= {ENUMERATION_GUARD}")
        self.table = table
        self.n = n
        self.g_kind = g_kind
        self.a = None if a is None else np.asarray(a, dtype=float)
        self.chunk = chunk

    def _value_of_g(self, G):
        G = np.atleast_2d(G)
        out = np.empty(G.shape[0])
        for start in range(0, G.shape[0], self.chunk):
            sl = slice(start, start + self.chunk)
            out[sl] = subset_probabilities(G[sl]) @ self.table
        return out

    def value_batch(self, X):
        return self._value_of_g(availability(X, self.g_kind, self.a))

    def gradient_batch(self, X):
        X = np.atleast_2d(X)
        G = availability(X, self.g_kind, self.a)
        return multilinear_gradient(self._value_of_g, G, availability_slope(X, self.g_kind, self.a))

    def value(self, x) -> float:
        return float(self.value_batch(np.asarray(x, dtype=float)[None, :])[0])

    def gradient(self, x) -> np.ndarray:
        return self.gradient_batch(np.asarray(x, dtype=float)[None, :])[0]
