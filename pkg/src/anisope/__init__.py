"""Pseudo-spectral simulator for the 3D primitive equations with horizontal
viscosity and diffusion only, plus numerical verifiers for the estimates that
control its solutions."""

from .domain import Grid, Params, Parity, ScalarField, State, extend, make_state, restrict
from .errors import AnisopeError
from .timestepper import StepControls, run, step

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "Params",
    "Parity",
    "ScalarField",
    "State",
    "StepControls",
    "AnisopeError",
    "extend",
    "make_state",
    "restrict",
    "run",
    "step",
]
