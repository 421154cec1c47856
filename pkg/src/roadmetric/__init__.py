"""Simulation and analysis of the Poisson roads random metric."""

from .geometry import Line, Point
from .kernels import BACKEND
from .sampler import Road, Scene, make_scene, sample_scene, scale_scene
from .solver import (
    BracketResult,
    GeodesicPath,
    eps_sweep,
    k_near_geodesics,
    kendall_upper_bound,
    t_eps,
)

__all__ = [
    "BACKEND",
    "BracketResult",
    "GeodesicPath",
    "Line",
    "Point",
    "Road",
    "Scene",
    "eps_sweep",
    "k_near_geodesics",
    "kendall_upper_bound",
    "make_scene",
    "sample_scene",
    "scale_scene",
    "t_eps",
]
__version__ = "0.1.0"
