"""No-three-in-line search: grid lines, rotation-reduced models, a seeded solver,
portfolio racing, verification and runtime analysis."""

from .geometry import GridPoint, LineIncidence, count_lines, enumerate_lines
from .model import ConstraintModel, build_direct, build_model, build_reduced, export_model, parse_model
from .search import SearchConfig, SolveOutcome, solve, solve_exhaustive
from .verify import Configuration, OrbitRepresentatives, expand, load_fixtures

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "ConstraintModel",
    "GridPoint",
    "LineIncidence",
    "OrbitRepresentatives",
    "SearchConfig",
    "SolveOutcome",
    "build_direct",
    "build_model",
    "build_reduced",
    "count_lines",
    "enumerate_lines",
    "expand",
    "export_model",
    "load_fixtures",
    "parse_model",
    "solve",
    "solve_exhaustive",
]
