"""Time-dependent route-planning oracle.

Preprocesses sampled min-cost-path trees from landmark vertices into compact
predecessor summaries and answers earliest-arrival queries with explicit
paths, falling back to exact time-dependent Dijkstra when needed.
"""

from .instance import Arc, GeneratorParams, TDInstance, generate
from .query import oracle_query, relative_error
from .search import QueryResult, UnreachableError, tdd_query
from .summaries import build_store, store_load, store_save
from .ttf import MetricBounds, TravelTimeFunction, slope_bounds, stacked_bounds

__all__ = [
    "Arc", "GeneratorParams", "TDInstance", "generate",
    "oracle_query", "relative_error",
    "QueryResult", "UnreachableError", "tdd_query",
    "build_store", "store_load", "store_save",
    "MetricBounds", "TravelTimeFunction", "slope_bounds", "stacked_bounds",
]
