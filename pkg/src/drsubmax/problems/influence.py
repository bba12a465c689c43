"""Continuous influence maximisation over live-arc scenarios."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..model import BoxBounds, DomainError, Instance, LinearConstraints, OracleProblem, RefusalError
from .availability import ENUMERATION_GUARD, G_KINDS, SetFunctionExtension

DEFAULT_P_LIVE = 0.1
DEFAULT_SCENARIOS = 5
ER_DENSITY = 0.2


def reachable_sets(n: int, arcs) -> list:
    """Nodes reachable from each node (itself included) along ``arcs``."""
    succ = [[] for _ in range(n)]
    for u, v in arcs:
        succ[u].append(v)
    out = []
    for src in range(n):
        seen = {src}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        out.append(frozenset(seen))
    return out


def sample_live_arcs(arcs, p_live: float, seed: int) -> list:
    rng = np.random.default_rng(seed)
    keep = rng.random(len(arcs)) < p_live
    return [tuple(arc) for arc, k in zip(arcs, keep) if k]


@dataclass(frozen=True, eq=False)
class InfluenceInstance:
    n_nodes: int
    arcs: tuple
    p_live: float
    scenario_seeds: tuple
    g_kind: str
    budget: float
    a: np.ndarray

    def __post_init__(self):
        arcs = tuple((int(u), int(v)) for u, v in self.arcs)
        for u, v in arcs:
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes) or u == v:
                raise DomainError(f"bad arc ({u}, {v})")
        if self.g_kind not in G_KINDS:
            raise DomainError(f"unknown availability kind {self.g_kind!r}")
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.size != self.n_nodes:
            raise DomainError("one contest parameter per node is required")
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "scenario_seeds", tuple(int(s) for s in self.scenario_seeds))
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.n_nodes

    @cached_property
    def scenarios(self) -> list:
        """Live-arc lists, one per scenario seed."""
        return [sample_live_arcs(self.arcs, self.p_live, s) for s in self.scenario_seeds]

    @cached_property
    def reach_sets(self) -> list:
        """``reach_sets[w][i]``: nodes influenced by seed ``i`` in scenario ``w``."""
        return [reachable_sets(self.n_nodes, live) for live in self.scenarios]

    @cached_property
    def scenario_tables(self) -> np.ndarray:
        """``f_w(S) = |union of reach sets|`` for every scenario and subset."""
        n = self.n_nodes
        if n > ENUMERATION_GUARD:
            raise RefusalError(f"influence enumeration limited to n <= {ENUMERATION_GUARD}")
        tables = np.zeros((len(self.reach_sets), 2**n))
        for w, reach in enumerate(self.reach_sets):
            masks = [sum(1 << v for v in r) for r in reach]
            union = [0] * (2**n)
            for S in range(1, 2**n):
                low = (S & -S).bit_length() - 1
                union[S] = union[S & (S - 1)] | masks[low]
            tables[w] = [bin(u).count("1") for u in union]
        return tables

    @cached_property
    def extension(self) -> SetFunctionExtension:
        return SetFunctionExtension(self.scenario_tables.sum(axis=0), self.g_kind, self.a)

    def payload(self) -> dict:
        return {
            "nodes": self.n_nodes,
            "arcs": [list(arc) for arc in self.arcs],
            "p_live": float(self.p_live),
            "scenario_seeds": list(self.scenario_seeds),
            "g_kind": self.g_kind,
            "budget": float(self.budget),
            "a": self.a,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "InfluenceInstance":
        return cls(
            int(payload["nodes"]),
            tuple(tuple(arc) for arc in payload["arcs"]),
            float(payload["p_live"]),
            tuple(payload["scenario_seeds"]),
            payload["g_kind"],
            float(payload["budget"]),
            payload["a"],
        )

    def to_problem(self) -> OracleProblem:
        ext = self.extension
        n = self.n_nodes
        return OracleProblem(
            ext.value,
            ext.gradient,
            BoxBounds.unit(n),
            LinearConstraints(np.ones((1, n)), [self.budget]),
            "influence_max",
            ext.value_batch,
            ext.gradient_batch,
        )


def influence_value(inst: InfluenceInstance, x) -> float:
    return inst.extension.value(x)


def influence_grad(inst: InfluenceInstance, x) -> np.ndarray:
    return inst.extension.gradient(x)


def gen_influence(
    n_nodes: int,
    budget: float,
    g_kind: str,
    seed: int,
    p_live: float = DEFAULT_P_LIVE,
    n_scenarios: int = DEFAULT_SCENARIOS,
) -> Instance:
    """Random digraph with ``2|N|+1`` arcs (fewer if the graph is too small)."""
    if n_nodes < 1:
        raise DomainError("graph needs at least one node")
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n_nodes) for v in range(n_nodes) if u != v]
    count = min(2 * n_nodes + 1, len(pairs))
    chosen = sorted(rng.choice(len(pairs), size=count, replace=False).tolist()) if count else []
    arcs = tuple(pairs[k] for k in chosen)
    seeds = tuple(int(s) for s in rng.integers(0, 2**63 - 1, size=n_scenarios))
    a = np.full(n_nodes, budget / n_nodes)
    inst = InfluenceInstance(n_nodes, arcs, p_live, seeds, g_kind, budget, a)
    return Instance("influence_max", seed, n_nodes, float(budget), inst.payload())
