"""Numerical laboratory for the cubic Szegő equation with the linear term ``alpha (u|1)``."""

__all__ = [
    "FourierState",
    "RationalState",
    "SzegoLabError",
    "SzegoLabWarning",
]

from .errors import SzegoLabError, SzegoLabWarning
from .hardy import FourierState, RationalState
