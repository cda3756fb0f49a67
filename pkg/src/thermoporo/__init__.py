"""
thermoporo - Solvers for biphasic thermo-poroelastic media

This package covers:
- Dimensionless groups from dimensional material parameters
- Closed-form spherical and Cartesian flow/deformation fields
- Coupled two-temperature steady heat transfer
- Radial transient thermo-poroelastic simulation
- Sweeps and grid-convergence studies driven from a config file
"""

from .config import RunConfig, ToolkitSettings, get_settings, parse_config
from .parameters import DimensionalParams, NondimGroups, nondimensionalize
from .spherical import SphericalParams, flow_rate
from .cartesian import CartesianCoefficients, compute_coefficients, displacement
from .thermal import ThermalProblem, solve_coupled_steady, solve_fourth_order
from .transient import TransientConfig, run_scenario, step
from .commands import cmd_converge, cmd_groups, cmd_solve, cmd_sweep, cmd_transient
from .error_handler import ThermoporoError, handle_failed_run, is_solver_failure

__version__ = "0.1.0"

__all__ = [
    # Configuration
    "RunConfig",
    "ToolkitSettings",
    "get_settings",
    "parse_config",
    # Parameters
    "DimensionalParams",
    "NondimGroups",
    "nondimensionalize",
    # Closed-form fields
    "SphericalParams",
    "flow_rate",
    "CartesianCoefficients",
    "compute_coefficients",
    "displacement",
    # Heat transfer
    "ThermalProblem",
    "solve_coupled_steady",
    "solve_fourth_order",
    # Transient
    "TransientConfig",
    "run_scenario",
    "step",
    # Commands
    "cmd_groups",
    "cmd_solve",
    "cmd_sweep",
    "cmd_converge",
    "cmd_transient",
    # Error handling
    "ThermoporoError",
    "handle_failed_run",
    "is_solver_failure",
]
