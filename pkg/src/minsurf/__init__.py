"""Numerical laboratory for minimal surfaces in round spheres.

Computes the tower of higher-order invariants (fundamental forms, curvature
ellipses, quadratic differentials, axis invariants), runs the classification
predicates (exceptional / superconformal / superminimal, Ricci condition,
six-sphere pseudoholomorphic types, self-duality), and rebuilds immersions
from invariant data by integrating moving frames.
"""

from .config import DEFAULT_TOLERANCES, Tolerances
from .chart import ChartGrid, JetTable, MetricField, build_chart

__all__ = [
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "ChartGrid",
    "JetTable",
    "MetricField",
    "build_chart",
]

__version__ = "0.1.0"
