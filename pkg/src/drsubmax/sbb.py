"""Spatial branch-and-bound driven by the approximate cutting plane."""

from __future__ import annotations

import csv
import enum
import heapq
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cutplane import CutPlaneOptions, approximate_cutting_plane, relative_gap
from .model import BoxBounds, DomainError, OracleProblem, assert_nonnegative_at_lower

PRUNE_TOL = 1e-9

PROGRESS_HEADER = [
    "node_id", "depth", "parent_id", "node_ub", "node_lb",
    "best_lb", "best_ub", "open_nodes", "elapsed_s",
]


class SbbTermination(str, enum.Enum):
    GAP = "gap"
    TIME_LIMIT = "time_limit"
    NODE_LIMIT = "node_limit"
    INFEASIBLE = "infeasible"


class CannotPartition(DomainError):
    pass


@dataclass
class SbbOptions:
    rel_gap: float = 0.05
    time_limit: float = 3600.0
    stall_iters: int = 5
    subproblem_gap: float = 1e-3
    max_nodes: Optional[int] = None
    max_cp_iterations: int = 200
    workers: int = 1
    progress: Optional[object] = None  # path or text stream for the per-node CSV log

    def cutplane_options(self) -> CutPlaneOptions:
        return CutPlaneOptions(self.stall_iters, self.subproblem_gap, self.max_cp_iterations)


@dataclass
class Node:
    box: BoxBounds
    inherited_cuts: list
    local_lb: float = -math.inf
    local_ub: float = math.inf
    depth: int = 0
    id: int = 0
    parent_id: int = -1
    own_cuts: list = field(default_factory=list)
    incumbent: Optional[np.ndarray] = None

    @property
    def all_cuts(self) -> list:
        return self.inherited_cuts + self.own_cuts


@dataclass
class SbbResult:
    best_lb: float
    best_ub: float
    incumbent: Optional[np.ndarray]
    nodes_explored: int
    wall_time: float
    termination: SbbTermination
    trace: list = field(default_factory=list)  # (node_id, parent_id, depth, node_lb, node_ub)

    @property
    def rel_gap(self) -> float:
        return relative_gap(self.best_lb, self.best_ub)


def partition(node: Node, ids=None) -> tuple:
    """Bisect the widest edge (lowest index on ties) at its midpoint."""
    width = node.box.width
    if not np.any(width > 0.0):
        raise CannotPartition("cannot partition a zero-volume box")
    i = int(np.argmax(width))
    lo, hi = node.box.lower[i], node.box.upper[i]
    mid = 0.5 * (lo + hi)
    cuts = node.all_cuts
    next_id = ids if ids is not None else itertools.count(node.id * 2 + 1)
    left = Node(node.box.replace(i, lo, mid), list(cuts), depth=node.depth + 1, id=next(next_id), parent_id=node.id)
    right = Node(node.box.replace(i, mid, hi), list(cuts), depth=node.depth + 1, id=next(next_id), parent_id=node.id)
    return left, right


def _bound(problem, node: Node, cp_opts) -> Node:
    res = approximate_cutting_plane(problem, node.box, node.inherited_cuts, cp_opts)
    node.local_lb = res.lower_bound
    node.local_ub = res.upper_bound
    node.own_cuts = res.cuts
    node.incumbent = res.incumbent
    return node


class _ProgressLog:
    def __init__(self, target):
        self._fh = None
        self._writer = None
        if target is None:
            return
        if hasattr(target, "write"):
            self._writer = csv.writer(target)
        else:
            self._fh = open(target, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._fh)
        self._writer.writerow(PROGRESS_HEADER)

    def row(self, node: Node, best_lb, best_ub, open_nodes, elapsed):
        if self._writer is not None:
            self._writer.writerow([
                node.id, node.depth, node.parent_id, repr(float(node.local_ub)), repr(float(node.local_lb)),
                repr(float(best_lb)), repr(float(best_ub)), open_nodes, f"{elapsed:.6f}",
            ])

    def close(self):
        if self._fh is not None:
            self._fh.close()


def solve(problem: OracleProblem, opts: Optional[SbbOptions] = None) -> SbbResult:
    """Best-bound spatial branch-and-bound.

    ``best_ub`` is always a valid upper bound on the maximum and ``best_lb``
    is the value of the returned feasible incumbent.  With ``workers > 1``
    the children of several open nodes are bounded concurrently; bookkeeping
    stays on the calling thread.
    """
    opts = opts or SbbOptions()
    assert_nonnegative_at_lower(problem)
    cp_opts = opts.cutplane_options()
    start = time.perf_counter()
    log = _ProgressLog(opts.progress)
    ids = itertools.count(1)
    trace = []

    root = _bound(problem, Node(problem.box, [], id=0), cp_opts)
    explored = 1
    trace.append((root.id, root.parent_id, root.depth, root.local_lb, root.local_ub))
    if root.local_ub == -math.inf:
        log.close()
        return SbbResult(-math.inf, -math.inf, None, explored, time.perf_counter() - start,
                         SbbTermination.INFEASIBLE, trace)

    best_lb, incumbent = root.local_lb, root.incumbent
    heap = []

    def keep(node: Node) -> bool:
        return node.local_ub > best_lb + PRUNE_TOL * max(1.0, abs(best_lb))

    def push(node: Node):
        heapq.heappush(heap, (-node.local_ub, node.id, node))

    def best_ub_now():
        return max([best_lb] + [-k for k, _, _ in heap])

    if keep(root):
        push(root)
    best_ub = best_ub_now()
    log.row(root, best_lb, best_ub, len(heap), time.perf_counter() - start)

    termination = SbbTermination.GAP
    pool = ThreadPoolExecutor(max_workers=opts.workers) if opts.workers > 1 else None
    try:
        while heap and relative_gap(best_lb, best_ub) > opts.rel_gap:
            if time.perf_counter() - start > opts.time_limit:
                termination = SbbTermination.TIME_LIMIT
                break
            if opts.max_nodes is not None and explored >= opts.max_nodes:
                termination = SbbTermination.NODE_LIMIT
                break

            batch = []
            while heap and len(batch) < max(1, opts.workers):
                _, _, node = heapq.heappop(heap)
                if not keep(node):
                    continue
                if not np.any(node.box.width > 0.0):
                    # a point box is exact up to LP noise; nothing left to split
                    continue
                batch.append(node)
            children = [c for node in batch for c in partition(node, ids)]
            if pool is not None:
                children = list(pool.map(lambda c: _bound(problem, c, cp_opts), children))
            else:
                children = [_bound(problem, c, cp_opts) for c in children]

            for child in children:
                explored += 1
                trace.append((child.id, child.parent_id, child.depth, child.local_lb, child.local_ub))
                if child.local_ub == -math.inf:
                    continue
                if child.local_lb > best_lb and child.incumbent is not None:
                    best_lb, incumbent = child.local_lb, child.incumbent
            for child in children:
                if child.local_ub != -math.inf and keep(child):
                    push(child)
            best_ub = best_ub_now()
            for child in children:
                log.row(child, best_lb, best_ub, len(heap), time.perf_counter() - start)
        else:
            best_ub = best_ub_now()
    finally:
        if pool is not None:
            pool.shutdown()
        log.close()

    if incumbent is None:
        return SbbResult(-math.inf, -math.inf, None, explored, time.perf_counter() - start,
                         SbbTermination.INFEASIBLE, trace)
    best_ub = best_ub_now()
    if termination is SbbTermination.GAP and relative_gap(best_lb, best_ub) > opts.rel_gap:
        termination = SbbTermination.NODE_LIMIT
    return SbbResult(best_lb, best_ub, incumbent, explored, time.perf_counter() - start, termination, trace)
