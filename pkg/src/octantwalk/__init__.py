"""Octant lattice walks: spherical triangles, Dirichlet eigenvalues and exponents."""

from .critical import covariance, find_critical_point, polar_triangle, realize_triangle, triangle_of
from .enumeration import count_excursions, growth_and_exponent_fit, period
from .fem import eigenvalue_sequence, triangulate, wynn_extrapolate
from .report import AnalysisReport, analyze
from .stepset import dimensionality, hadamard_decompose, half_space_check, inventory, parse_steps

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "analyze",
    "count_excursions",
    "covariance",
    "dimensionality",
    "eigenvalue_sequence",
    "find_critical_point",
    "growth_and_exponent_fit",
    "hadamard_decompose",
    "half_space_check",
    "inventory",
    "parse_steps",
    "period",
    "polar_triangle",
    "realize_triangle",
    "triangle_of",
    "triangulate",
    "wynn_extrapolate",
]
