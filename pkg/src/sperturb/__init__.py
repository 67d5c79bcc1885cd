"""Linear finite elements for singularly perturbed two-point problems.

Isolation of the boundary layer by a single extra node, invariant crossing
points of solutions on nested meshes, and the routines that check both.
"""
from .assembly import TridiagonalSystem, assemble, load_entry, load_vector, stiffness_row
from .exceptions import (
    DegenerateRatioError,
    DomainError,
    InvalidParameterError,
    LayerTooWideError,
    SingularMatrixError,
    SperturbError,
)
from .fem import FemSolution, evaluate, interpolant, max_node_error, solve
from .intersect import Intersection, geometric_intersections, predicted_intersections
from .linalg import det_ratio, green_column, solve_banded3, solve_tridiagonal, unit_response
from .mesh import (
    Mesh,
    add_points,
    eps_uniform_mesh,
    eps_uniform_offset,
    shishkin,
    shishkin_theta,
    uniform,
)
from .problem import (
    ExactSolution,
    Generic,
    PointMass,
    Polynomial,
    Problem,
    exact_eval,
    example,
    make_cde,
    make_green,
    make_rde,
    reflect,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateRatioError", "DomainError", "ExactSolution", "FemSolution", "Generic",
    "Intersection", "InvalidParameterError", "LayerTooWideError", "Mesh", "PointMass",
    "Polynomial", "Problem", "SingularMatrixError", "SperturbError", "TridiagonalSystem",
    "add_points", "assemble", "det_ratio", "eps_uniform_mesh", "eps_uniform_offset",
    "evaluate", "exact_eval", "example", "geometric_intersections", "green_column",
    "interpolant", "load_entry", "load_vector", "make_cde", "make_green", "make_rde",
    "max_node_error", "predicted_intersections", "reflect", "shishkin", "shishkin_theta",
    "solve", "solve_banded3", "solve_tridiagonal", "stiffness_row", "uniform", "unit_response",
]
