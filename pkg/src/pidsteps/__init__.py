"""Exact setpoint-change responses of PID-controlled loops with one
transport delay, solved interval by interval in closed form, plus an
independent RK4 cross-check and step-response metrics."""

from .closedloop import (
    DdeSystem,
    PidParams,
    PlantModel,
    RootsNotRealSimple,
    build_closed_loop,
    characteristic_roots,
)
from .exppoly import ExpPoly
from .metrics import ResponseMetrics, compute_metrics
from .oracle import OracleTrajectory, integrate
from .stepper import (
    DegenerateLeadingCoefficient,
    ForcingTerm,
    InitialCondition,
    PiecewiseSolution,
    advance_constant_part,
    advance_polynomial_part,
    solve,
)
from .vandermonde import (
    SingularSystem,
    VandermondeSystem,
    solve_cramer,
    solve_elimination,
    vandermonde_determinant,
)

__all__ = [
    "DdeSystem",
    "DegenerateLeadingCoefficient",
    "ExpPoly",
    "ForcingTerm",
    "InitialCondition",
    "OracleTrajectory",
    "PidParams",
    "PiecewiseSolution",
    "PlantModel",
    "ResponseMetrics",
    "RootsNotRealSimple",
    "SingularSystem",
    "VandermondeSystem",
    "advance_constant_part",
    "advance_polynomial_part",
    "build_closed_loop",
    "characteristic_roots",
    "compute_metrics",
    "integrate",
    "solve",
    "solve_cramer",
    "solve_elimination",
    "vandermonde_determinant",
]

__version__ = "0.1.0"
