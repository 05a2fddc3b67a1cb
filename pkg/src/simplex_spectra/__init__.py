"""Spectral gaps, Nash-type inequalities and diffusions on the probability simplex."""
from .errors import ConfigError, NumericalAlarm, SimplexSpectraError
from .forms import DiffusionModel
from .params import AlphaParams, validate

__version__ = "0.1.0"

__all__ = [
    "AlphaParams",
    "ConfigError",
    "DiffusionModel",
    "NumericalAlarm",
    "SimplexSpectraError",
    "validate",
]
