"""Global maximisation of monotone DR-submodular functions over boxes with linear constraints.

The solvers only need function values and gradients.  Envelope cuts give
an LP outer approximation of the hypograph; spatial branch-and-bound
shrinks boxes until the cut bounds close.
"""

from .cutplane import (
    CutPlaneOptions,
    CutPlaneResult,
    ExactOptions,
    approximate_cutting_plane,
    build_relu_graph_rows,
    exact_cutting_plane,
)
from .envelopes import (
    Cut,
    CutKind,
    coarse_error_bound,
    envelope_cut,
    overestimator_value,
    single_cut_error_bound,
)
from .model import (
    BoxBounds,
    DomainError,
    Instance,
    LinearConstraints,
    OracleProblem,
    RefusalError,
    check_submodular_sample,
    evaluate,
    project_into_box,
)
from .sbb import Node, SbbOptions, SbbResult, partition
from .sbb import solve as sbb_solve

__version__ = "0.1.0"

__all__ = [
    "BoxBounds",
    "Cut",
    "CutKind",
    "CutPlaneOptions",
    "CutPlaneResult",
    "DomainError",
    "ExactOptions",
    "Instance",
    "LinearConstraints",
    "Node",
    "OracleProblem",
    "RefusalError",
    "SbbOptions",
    "SbbResult",
    "approximate_cutting_plane",
    "build_relu_graph_rows",
    "check_submodular_sample",
    "coarse_error_bound",
    "envelope_cut",
    "evaluate",
    "exact_cutting_plane",
    "overestimator_value",
    "partition",
    "project_into_box",
    "sbb_solve",
    "single_cut_error_bound",
]
