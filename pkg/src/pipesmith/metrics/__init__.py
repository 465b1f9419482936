"""Pipeline comparison: exact matching, edit distance, batch reports."""

from .exact import MatchResult, exact_match
from .ged import EditOp, GedResult, ged
from .matching import MatchConfig, edge_match, node_match, substitution_cause
from .report import AMBIGUITY_LEVELS, error_breakdown, evaluate_dataset, size_bin

__all__ = [
    "AMBIGUITY_LEVELS",
    "EditOp",
    "GedResult",
    "MatchConfig",
    "MatchResult",
    "edge_match",
    "error_breakdown",
    "evaluate_dataset",
    "exact_match",
    "ged",
    "node_match",
    "size_bin",
    "substitution_cause",
]
