"""Curriculum-based course timetabling: instances, models, exact solving,
and surface-then-dive run strategies."""

__version__ = "0.1.0"

from .evaluation import (PenaltyVector, Solution, check_hard, evaluate, gap,
                         penalties)
from .instance import Instance, parse_ctt, serialize_ctt
from .milp import MilpModel, MilpSolution, export_mps, parse_mps

__all__ = [
    "Instance", "parse_ctt", "serialize_ctt",
    "Solution", "PenaltyVector", "check_hard", "penalties", "evaluate", "gap",
    "MilpModel", "MilpSolution", "export_mps", "parse_mps",
    "__version__",
]
