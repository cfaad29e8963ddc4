"""Planar open elastic curves with Coulomb endpoint repulsion, evolved by an
implicit variational (minimizing-movement) scheme on equal-edge polylines."""

from .energy import (
    EnergyBreakdown,
    EnergyParams,
    dissipation,
    energy,
    objective,
    objective_gradient,
)
from .errors import (
    BadParameters,
    BoundViolation,
    CurveFlowError,
    CuspAngle,
    DegenerateGap,
    IndexOutOfRange,
    LineSearchFailure,
    MismatchedN,
    TooFewPoints,
    UnequalEdges,
    ZeroEdgeLength,
    ZeroLengthInput,
)
from .flow import (
    FlowConfig,
    Trajectory,
    VelocityField,
    coupling_residual,
    run_flow,
    velocity,
)
from .diagnostics import (
    ResidualReport,
    boundary_residual,
    fd_gradient_check,
    full_residual_report,
    interior_residual,
    loop_diameter,
    self_intersections,
)
from .io import read_trajectory_jsonl, render_svg, write_trajectory
from .minimize import (
    SolverOptions,
    StepReport,
    assert_cone_condition,
    minimize_step,
)
from .polyline import (
    DiscreteCurve,
    EdgeFrame,
    Measures,
    ReducedCoords,
    discrete_curvature,
    edge_frame,
    from_reduced,
    measures,
    resample_equal_arclength,
    to_reduced,
    turning_angles,
    validate,
)
from .scenarios import PRESETS, Preset, Scenario, make_scenario

__version__ = "0.1.0"

__all__ = [
    "BadParameters",
    "BoundViolation",
    "CurveFlowError",
    "CuspAngle",
    "DegenerateGap",
    "DiscreteCurve",
    "EdgeFrame",
    "EnergyBreakdown",
    "EnergyParams",
    "FlowConfig",
    "IndexOutOfRange",
    "LineSearchFailure",
    "Measures",
    "MismatchedN",
    "PRESETS",
    "Preset",
    "ReducedCoords",
    "ResidualReport",
    "Scenario",
    "SolverOptions",
    "StepReport",
    "TooFewPoints",
    "Trajectory",
    "UnequalEdges",
    "VelocityField",
    "ZeroEdgeLength",
    "ZeroLengthInput",
    "assert_cone_condition",
    "boundary_residual",
    "coupling_residual",
    "discrete_curvature",
    "dissipation",
    "edge_frame",
    "energy",
    "fd_gradient_check",
    "from_reduced",
    "full_residual_report",
    "interior_residual",
    "loop_diameter",
    "make_scenario",
    "measures",
    "minimize_step",
    "objective",
    "objective_gradient",
    "read_trajectory_jsonl",
    "render_svg",
    "resample_equal_arclength",
    "run_flow",
    "self_intersections",
    "to_reduced",
    "turning_angles",
    "validate",
    "velocity",
    "write_trajectory",
]
