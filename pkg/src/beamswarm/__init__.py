"""Large planar deflection of tip-loaded cantilevers, solved by particle swarm search."""

from ._kernels import BACKEND
from .beam import (
    BeamGeometry,
    DeflectionCurve,
    TipLoad,
    TipState,
    WidthKnots,
    generate_random_widths,
    integrate_deflection,
    interpolate_width_profile,
    moment_at,
    second_moment_profile,
)
from .oracle import OracleParams, linear_tip_deflection, newton_shooting_solve, reference_solve, residual
from .pso import PsoParams
from .solver import SolveResult, fitness, normalized_tip_error, solve_tip_locus, sweep_loads

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BeamGeometry",
    "DeflectionCurve",
    "OracleParams",
    "PsoParams",
    "SolveResult",
    "TipLoad",
    "TipState",
    "WidthKnots",
    "fitness",
    "generate_random_widths",
    "integrate_deflection",
    "interpolate_width_profile",
    "linear_tip_deflection",
    "moment_at",
    "newton_shooting_solve",
    "normalized_tip_error",
    "reference_solve",
    "residual",
    "second_moment_profile",
    "solve_tip_locus",
    "sweep_loads",
]
