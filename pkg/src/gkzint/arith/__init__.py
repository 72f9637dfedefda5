"""Exact arithmetic: Q, Q(δ), Q(δ)(z), sparse polynomials and linear algebra."""

from fractions import Fraction as BigRat

from .fields import ParamRat, RatFunc, Ring, to_fraction
from .matrix import Matrix, nullspace, rank
from .mpoly import MPoly, poly_divmod, poly_gcd
from .orders import TermOrder
from .parse import parse_expr, parse_param, parse_ratfunc


def rf_derivative(f: RatFunc, var: str) -> RatFunc:
    return f.derivative(var)


__all__ = [
    "BigRat",
    "Matrix",
    "MPoly",
    "ParamRat",
    "RatFunc",
    "Ring",
    "TermOrder",
    "nullspace",
    "parse_expr",
    "parse_param",
    "parse_ratfunc",
    "poly_divmod",
    "poly_gcd",
    "rank",
    "rf_derivative",
    "to_fraction",
]
