"""Stabilized GRP finite-volume solver for multi-dimensional Burgers' equation
on the periodic unit torus, with entropy and consistency diagnostics."""

from grpburgers.errors import BlowUpError, ConfigError, GRPError, InputError
from grpburgers.flux import C1_DEFAULT, Case, face_fluxes, riemann_value
from grpburgers.mesh import Field, Mesh, project
from grpburgers.profiles import ConstantProfile, RiemannProfile, SineProfile
from grpburgers.stepper import RunConfig, Trajectory, run, step

__all__ = [
    "BlowUpError", "C1_DEFAULT", "Case", "ConfigError", "ConstantProfile", "Field",
    "GRPError", "InputError", "Mesh", "RiemannProfile", "RunConfig", "SineProfile",
    "Trajectory", "face_fluxes", "project", "riemann_value", "run", "step",
]
__version__ = "0.1.0"
