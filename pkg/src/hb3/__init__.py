"""Exact and numerical tools for sup-norm counting problems on Bianchi quotients over Z[i]."""

from .congruence import IntMatrix2, StarElement, is_fundamental, membership, reduce
from .counting import CountParams, CountReport, count_grid, count_M, diophantine_audit, enumerate_matches
from .gaussian import GaussianInt, Level, ggcd, gnorm, prime_set
from .gon import Lattice4, MinimaProfile, count_ball, lattice_of, successive_minima
from .h3geom import ComplexMatrix2, H3Point, Quaternion, act, point_pair_u

__version__ = "0.1.0"

__all__ = [
    "GaussianInt",
    "Level",
    "gnorm",
    "ggcd",
    "prime_set",
    "ComplexMatrix2",
    "H3Point",
    "Quaternion",
    "act",
    "point_pair_u",
    "Lattice4",
    "MinimaProfile",
    "count_ball",
    "lattice_of",
    "successive_minima",
    "IntMatrix2",
    "StarElement",
    "is_fundamental",
    "membership",
    "reduce",
    "CountParams",
    "CountReport",
    "count_M",
    "count_grid",
    "diophantine_audit",
    "enumerate_matches",
]
