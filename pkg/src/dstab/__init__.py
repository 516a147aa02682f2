"""Robust D-stability margins for multilinear parametric uncertainty."""

from .bounds import BoundsConfig, FrequencyBounds, frequency_bounds, lower_bound, upper_bound
from .errors import DStabError
from .params import MonomialPolynomial, ParameterBox, StateSpacePolynomial, scale_box
from .region import Disk, DRegion, HalfPlane, left_half_plane
from .split import CutScheme
from .sweep import SweepConfig, algorithm1, algorithm2, compare

__version__ = "0.1.0"

__all__ = [
    "BoundsConfig", "CutScheme", "DRegion", "DStabError", "Disk", "FrequencyBounds",
    "HalfPlane", "MonomialPolynomial", "ParameterBox", "StateSpacePolynomial",
    "SweepConfig", "algorithm1", "algorithm2", "compare", "frequency_bounds",
    "left_half_plane", "lower_bound", "scale_box", "upper_bound",
]
