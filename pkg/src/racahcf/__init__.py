"""Wigner-Racah algebra for SU(2) > G chains, weak-field crystal-field
matrices and nonstandard mutually unbiased bases."""

from .errors import ConsistencyError, InvalidInputError, RacahError, UnsupportedError
from .exactnum import ExactComplex, HalfInt, SqrtRationalSum, canonicalize

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "ExactComplex",
    "HalfInt",
    "InvalidInputError",
    "RacahError",
    "SqrtRationalSum",
    "UnsupportedError",
    "canonicalize",
]
