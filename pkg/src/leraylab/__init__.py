"""Numerical laboratory for planar viscous flow past the unit disc.

Solves the stationary Navier-Stokes system on expanding annuli in
stream-function / vorticity form, recovers the pressure, and checks the
integral estimates (energy-force identities, circle-average bounds,
pressure oscillation after blow-down) that control the vanishing-viscosity
style limit of the expanding-domain approximations.
"""

__version__ = "0.1.0"

from .blowdown import BlowDownReport, blow_down, rescale_state
from .diagnostics import (
    AngleSlack,
    BernoulliReport,
    ForceReport,
    InequalitySlack,
    bernoulli_analysis,
    bernoulli_head,
    energy_identity_slack,
    force_on_obstacle,
    gw_angle_slack,
    gw_pressure_slack,
    gw_velocity_slack,
)
from .driver import (
    ExperimentConfig,
    SweepReport,
    check_report,
    emit_reports,
    grid_size_for,
    run_invading_sequence,
    run_lambda_sweep,
)
from .fields import (
    PolarGrid,
    ScalarField,
    VectorField,
    build_grid,
    interpolate_field,
    read_field,
    write_field,
)
from .mms import ManufacturedCase, manufactured_case
from .reference import FarFieldProbe, far_field_probe, leading_order_force, potential_flow_guess
from .solver import (
    FlowState,
    LineSearchDiverged,
    NonConvergence,
    PressureField,
    SolveConfig,
    load_state,
    momentum_residual,
    recover_pressure,
    save_state,
    solve_stationary,
)

__all__ = [
    "PolarGrid",
    "ScalarField",
    "VectorField",
    "build_grid",
    "interpolate_field",
    "read_field",
    "write_field",
    "FlowState",
    "SolveConfig",
    "PressureField",
    "NonConvergence",
    "LineSearchDiverged",
    "solve_stationary",
    "recover_pressure",
    "momentum_residual",
    "save_state",
    "load_state",
    "ManufacturedCase",
    "manufactured_case",
    "ForceReport",
    "InequalitySlack",
    "AngleSlack",
    "BernoulliReport",
    "force_on_obstacle",
    "energy_identity_slack",
    "gw_pressure_slack",
    "gw_velocity_slack",
    "gw_angle_slack",
    "bernoulli_head",
    "bernoulli_analysis",
    "BlowDownReport",
    "blow_down",
    "rescale_state",
    "FarFieldProbe",
    "far_field_probe",
    "leading_order_force",
    "potential_flow_guess",
    "ExperimentConfig",
    "SweepReport",
    "grid_size_for",
    "run_invading_sequence",
    "run_lambda_sweep",
    "emit_reports",
    "check_report",
    "__version__",
]
