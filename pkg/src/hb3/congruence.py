"""Integer matrices, membership in R(n) for Gamma_0(N), and reduction to F(N).

The normalizer Gamma_0^*(N) of a squarefree level consists of the matrices
[[Ma, b], [Mc, Md]] with M | N | Mc and Mad - bc = 1, taken up to scalars.
An element moves P to a point of height r / (|M| |cP + d|^2), so the
highest point of an orbit is found by searching short vectors of L(P).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .gaussian import ONE, ZERO, GaussianInt, Level, as_gaussian, ggcd, gxgcd, ideal_divisors
from .gon import enumerate_ball, exact_norm2
from .h3geom import ComplexMatrix2, H3Point, act

__all__ = [
    "IntMatrix2",
    "StarElement",
    "Membership",
    "MembershipResult",
    "membership",
    "star_im_sup",
    "reduce",
    "is_fundamental",
    "compose",
    "IMPROVE_TOL",
]

# a step must raise the height by a factor of at least 1 + IMPROVE_TOL;
# smaller gains are float noise at the boundary of F(N)
IMPROVE_TOL = Fraction(1, 2**40)
MAX_STEPS = 500


@dataclass(frozen=True)
class IntMatrix2:
    a: GaussianInt
    b: GaussianInt
    c: GaussianInt
    d: GaussianInt
    det: GaussianInt = field(init=False, compare=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, as_gaussian(getattr(self, name)))
        object.__setattr__(self, "det", self.a * self.d - self.b * self.c)

    @classmethod
    def of(cls, g) -> IntMatrix2:
        if isinstance(g, IntMatrix2):
            return g
        if isinstance(g, StarElement):
            return g.matrix()
        (a, b), (c, d) = g
        return cls(a, b, c, d)

    def __matmul__(self, o: IntMatrix2) -> IntMatrix2:
        return IntMatrix2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def adjugate(self) -> IntMatrix2:
        return IntMatrix2(self.d, -self.b, -self.c, self.a)

    def entries(self) -> tuple[GaussianInt, GaussianInt, GaussianInt, GaussianInt]:
        return (self.a, self.b, self.c, self.d)

    def key(self) -> tuple[int, ...]:
        return tuple(v for e in self.entries() for v in (e.re, e.im))

    def to_complex(self) -> ComplexMatrix2:
        return ComplexMatrix2(complex(self.a), complex(self.b), complex(self.c), complex(self.d))

    def __str__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


IDENTITY = IntMatrix2(ONE, ZERO, ZERO, ONE)


@dataclass(frozen=True)
class StarElement:
    """[[M a, b], [M c, M d]] with M | N | M c and M a d - b c = 1."""

    M: GaussianInt
    a: GaussianInt
    b: GaussianInt
    c: GaussianInt
    d: GaussianInt

    def matrix(self) -> IntMatrix2:
        M = self.M
        return IntMatrix2(M * self.a, self.b, M * self.c, M * self.d)

    def is_valid(self, N) -> bool:
        N = Level.of(N).n
        M = self.M
        return (
            bool(M)
            and M.divides(N)
            and N.divides(M * self.c)
            and M * self.a * self.d - self.b * self.c == ONE
        )

    def __str__(self):
        return f"M={self.M} {self.matrix()}"


def _translation(k: GaussianInt) -> StarElement:
    return StarElement(ONE, ONE, k, ZERO, ONE)


# diag(i, -i) acts as z -> -z and fixes the height
_ROTATION = StarElement(ONE, GaussianInt(0, 1), ZERO, ZERO, GaussianInt(0, -1))
_IDENTITY_STAR = StarElement(ONE, ONE, ZERO, ZERO, ONE)


class Membership(str, enum.Enum):
    IN_R1 = "in_R1"
    IN_RN = "in_Rn_for_det"
    NOT_MEMBER = "not_member"


@dataclass(frozen=True)
class MembershipResult:
    kind: Membership
    det: GaussianInt


def membership(g, N) -> MembershipResult:
    """Classify g by N | c, (a, N) = 1 and its determinant."""
    g = IntMatrix2.of(g)
    N = Level.of(N).n
    det = g.det
    ok = bool(det) and N.divides(g.c) and (ggcd(g.a, N).is_unit() if g.a else N.is_unit())
    if not ok:
        return MembershipResult(Membership.NOT_MEMBER, det)
    if det == ONE:
        return MembershipResult(Membership.IN_R1, det)
    return MembershipResult(Membership.IN_RN, det)


def _complete_row(M: GaussianInt, c: GaussianInt, d: GaussianInt) -> StarElement:
    # x (M d) + y c = 1  =>  a = x, b = -y gives M a d - b c = 1
    g, x, y = gxgcd(M * d, c)
    if g != ONE:
        raise ValueError(f"row ({M * c}, {M * d}) is not primitive")
    return StarElement(M, x, -y, c, d)


def _require_squarefree(N: Level):
    if not N.squarefree:
        raise ValueError(f"level {N} is not squarefree")


def _row_basis(P: H3Point, k: GaussianInt) -> np.ndarray:
    """Rows 1, i, kP, ikP: the part of L(P) with c in k Z[i]."""
    kz = complex(k) * P.z
    kr = complex(k) * P.r
    return np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [kz.real, kz.imag, kr.real, kr.imag], [-kz.imag, kz.real, -kr.imag, kr.real]],
        dtype=float,
    )


def _best_row(P: H3Point, M: GaussianInt, cofactor: GaussianInt, bound2: float):
    """Smallest exact |cP + d|^2 <= bound2 over admissible rows, with its row."""
    B = _row_basis(P, cofactor)
    covol = P.r * P.r * cofactor.norm()
    # grow the radius so that early hits stay cheap
    R2 = min(bound2, max(math.sqrt(40.0 * covol), 1e-300))
    while True:
        X = enumerate_ball(B, None, math.sqrt(R2))
        found = None
        for row in X:
            dr, di, kr, ki = (int(v) for v in row)
            c = cofactor * GaussianInt(kr, ki)
            d = GaussianInt(dr, di)
            if not c and not d:
                continue
            if not (ggcd(c, M) if c else M.canonical()).is_unit():
                continue
            if not ggcd(c, d).is_unit():
                continue
            n2 = exact_norm2(P, (d.re, d.im, c.re, c.im))
            key = (n2, (c.re, c.im, d.re, d.im))
            if found is None or key < found[0]:
                found = (key, c, d)
        if found is not None or R2 >= bound2:
            return found
        R2 = min(bound2, 4.0 * R2)


def star_im_sup(P: H3Point, N, search_bound: float = 1.0) -> tuple[StarElement, float]:
    """Highest image of P among star elements with |McP + Md|^2 <= search_bound |M|.

    Every element that raises the height has |McP + Md|^2 < |M|, so any
    search_bound >= 1 certifies the result; smaller values are doubled.
    Ties resolve to the identity, then by (norm M, row).
    """
    N = Level.of(N)
    _require_squarefree(N)
    while search_bound < 1.0:
        search_bound *= 2.0
    best_key = (Fraction(1), 0, (0, 0, 0, 0))
    best = _IDENTITY_STAR
    for M in ideal_divisors(N.n):
        nM = M.norm()
        hit = _best_row(P, M, N.n.exact_div(M), search_bound / math.sqrt(nM))
        if hit is None:
            continue
        (n2, rowkey), c, d = hit
        val = nM * n2 * n2
        key = (val, nM, rowkey)
        if val < 1 - IMPROVE_TOL and key < best_key:
            best_key = key
            best = _complete_row(M, c, d)
    best_im = P.r / math.sqrt(float(best_key[0]))
    return best, best_im


def compose(witness: list[StarElement]) -> IntMatrix2:
    """Product w_k ... w_1 of the applied steps (first step rightmost)."""
    g = IDENTITY
    for w in witness:
        g = w.matrix() @ g
    return g


def _to_strip(P: H3Point, witness: list[StarElement]) -> H3Point:
    k = GaussianInt(round(P.zre), round(P.zim))
    if k:
        P = H3Point(P.zre - k.re, P.zim - k.im, P.r)
        witness.append(_translation(-k))
    if P.zim < 0:
        P = H3Point(-P.zre, -P.zim, P.r)
        witness.append(_ROTATION)
    return P


def reduce(P: H3Point, N, search_bound: float = 1.0) -> tuple[H3Point, list[StarElement]]:
    """Move P into F(N) by height-raising steps, translations and the z -> -z fold."""
    N = Level.of(N)
    _require_squarefree(N)
    witness: list[StarElement] = []
    P = _to_strip(P, witness)
    for _ in range(MAX_STEPS):
        g, im = star_im_sup(P, N, search_bound)
        if g == _IDENTITY_STAR:
            return P, witness
        Q = act(g.matrix().to_complex(), P)
        if not Q.r > P.r:
            # exact gain below float resolution; treat as the boundary
            return P, witness
        witness.append(g)
        P = _to_strip(Q, witness)
    raise ArithmeticError(f"reduction did not settle within {MAX_STEPS} steps")


def is_fundamental(P: H3Point, N) -> bool:
    """Strip conditions plus absence of any height-raising star element."""
    N = Level.of(N)
    _require_squarefree(N)
    if not (abs(P.zre) <= 0.5 and 0.0 <= P.zim <= 0.5):
        return False
    g, _ = star_im_sup(P, N)
    return g == _IDENTITY_STAR
