"""Numerical toolkit for Hardy-space operators over amalgam norms on
periodic sampling grids."""

__version__ = "0.1.0"

from .grid import GridFunction, GridSpec, make_grid, sample  # noqa: F401
from .norms import Exponents, amalgam_norm  # noqa: F401
