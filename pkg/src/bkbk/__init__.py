"""Pseudo-spectral tools for the regularised BKBK shallow-water family."""

from .errors import (BKBKError, BlowUpError, ConfigError, DepthUnderflowError,
                     NonFiniteFieldError, SingularModeError, VacuumError)
from .spectral import Grid1D, Grid2D
from .model1d import Params1D, State1D, VState1D, TravellingWaveParams
from .model2d import Params2D, State2D, CasimirFn
from .timestep import Schedule

__all__ = [
    "BKBKError", "BlowUpError", "ConfigError", "DepthUnderflowError", "NonFiniteFieldError",
    "SingularModeError", "VacuumError", "Grid1D", "Grid2D", "Params1D", "State1D", "VState1D",
    "TravellingWaveParams", "Params2D", "State2D", "CasimirFn", "Schedule",
]

__version__ = "0.1.0"
