from bnkit.infer.elimination import (
    HEURISTICS,
    MIN_FILL,
    MIN_NEIGHBOURS,
    MIN_WEIGHT,
    WEIGHTED_MIN_FILL,
    elimination_order,
    induced_width,
    ve_query,
)
from bnkit.infer.evidence import Evidence
from bnkit.infer.junction import JunctionTree, bp_query, build_junction_tree, calibrate

__all__ = [
    "HEURISTICS",
    "MIN_FILL",
    "MIN_NEIGHBOURS",
    "MIN_WEIGHT",
    "WEIGHTED_MIN_FILL",
    "Evidence",
    "JunctionTree",
    "bp_query",
    "build_junction_tree",
    "calibrate",
    "elimination_order",
    "induced_width",
    "ve_query",
]
