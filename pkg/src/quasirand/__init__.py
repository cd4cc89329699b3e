"""Quasirandom graphs: induced-count deviations, signed statistics, a
sample-and-repair construction with small u_k, Schatten norms and
exhaustive oracles."""

from __future__ import annotations

__version__ = "0.1.0"

from .catalog import SmallGraph, enumerate_classes, family
from .census import deviation, expected_count, induced_census
from .errors import (
    ConstructionError,
    ConvergenceFailure,
    GraphParseError,
    PreconditionError,
    QuasirandError,
    ReservoirShortfall,
    RetriesExhausted,
    UnsupportedError,
    WorkCapExceeded,
)
from .graph import Graph, complement, nearest_integer_distance, sample_gnp

__all__ = [
    "Graph", "SmallGraph", "complement", "sample_gnp", "nearest_integer_distance",
    "enumerate_classes", "family", "induced_census", "expected_count", "deviation",
    "QuasirandError", "PreconditionError", "UnsupportedError", "WorkCapExceeded",
    "GraphParseError", "ConstructionError", "ReservoirShortfall", "ConvergenceFailure",
    "RetriesExhausted",
]
