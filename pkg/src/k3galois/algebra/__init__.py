"""Polynomial arithmetic, root finding, linear geometry and numerical solving."""

from .linear import CoverSpec, LinearSubspace
from .poly import (COMPLEX, EXACT, MultiPoly, PolySyntaxError, act_linear,
                   discriminant_numerator, parse_poly, resultant)
from .roots import roots_univariate
from .solve import (CompiledSystem, EmptinessResult, is_empty_intersection,
                    solve_square_system, total_degree_homotopy)

__all__ = [
    "COMPLEX", "EXACT", "MultiPoly", "PolySyntaxError", "parse_poly", "act_linear",
    "resultant", "discriminant_numerator", "roots_univariate", "LinearSubspace",
    "CoverSpec", "CompiledSystem", "solve_square_system", "total_degree_homotopy",
    "is_empty_intersection", "EmptinessResult",
]
