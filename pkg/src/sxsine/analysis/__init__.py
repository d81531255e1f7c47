"""Numerical verification of the sine encoding."""

from .dynamics import (
    STATE_VARS,
    AffineSystem,
    StateVector,
    Trajectory,
    affine_system,
    analytic_state,
    analytic_trajectory,
    conservation_residual,
    simulate,
    sine_through,
    time_grid,
    vector_field,
)
from .expm import affine_power, expm_taylor, step_map
from .flowpipe import (
    ContainmentReport,
    Flowpipe,
    Parallelotope,
    Segment,
    Violation,
    check_containment,
    flowpipe,
    project_flowpipe,
    zonotope_polygon,
)

__all__ = [
    "STATE_VARS", "AffineSystem", "StateVector", "Trajectory", "affine_system",
    "analytic_state", "analytic_trajectory", "conservation_residual", "simulate",
    "sine_through", "time_grid", "vector_field", "affine_power", "expm_taylor",
    "step_map", "ContainmentReport", "Flowpipe", "Parallelotope", "Segment",
    "Violation", "check_containment", "flowpipe", "project_flowpipe",
    "zonotope_polygon",
]
