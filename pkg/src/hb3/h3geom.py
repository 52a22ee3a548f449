"""Quaternions, the GL2(C) action on upper half-space, and the point-pair invariant."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = [
    "Quaternion",
    "H3Point",
    "ComplexMatrix2",
    "qmul",
    "qinv",
    "act",
    "im_ratio",
    "point_pair_u",
    "u_via_normalized",
    "principal_sqrt",
    "REL_TOL",
]

# identities are certified to this relative tolerance
REL_TOL = 1e-9


@dataclass(frozen=True)
class Quaternion:
    x: float
    y: float = 0.0
    z: float = 0.0
    w: float = 0.0

    @classmethod
    def from_complex(cls, c: complex) -> Quaternion:
        c = complex(c)
        return cls(c.real, c.imag, 0.0, 0.0)

    def __add__(self, o: Quaternion) -> Quaternion:
        return Quaternion(self.x + o.x, self.y + o.y, self.z + o.z, self.w + o.w)

    def __sub__(self, o: Quaternion) -> Quaternion:
        return Quaternion(self.x - o.x, self.y - o.y, self.z - o.z, self.w - o.w)

    def __mul__(self, o):
        if isinstance(o, Quaternion):
            return qmul(self, o)
        return qmul(self, Quaternion.from_complex(o))

    def __rmul__(self, o):
        return qmul(Quaternion.from_complex(o), self)

    def __neg__(self):
        return Quaternion(-self.x, -self.y, -self.z, -self.w)

    def conj(self) -> Quaternion:
        return Quaternion(self.x, -self.y, -self.z, -self.w)

    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.w)


def qmul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product in the basis {1, i, j, k}."""
    a1, b1, c1, d1 = p.x, p.y, p.z, p.w
    a2, b2, c2, d2 = q.x, q.y, q.z, q.w
    return Quaternion(
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def qinv(q: Quaternion) -> Quaternion:
    n2 = q.norm2()
    if n2 == 0:
        raise ZeroDivisionError("zero quaternion has no inverse")
    c = q.conj()
    return Quaternion(c.x / n2, c.y / n2, c.z / n2, c.w / n2)


@dataclass(frozen=True)
class H3Point:
    """P = z + r j with z = zre + i zim and r > 0."""

    zre: float
    zim: float
    r: float

    def __post_init__(self):
        for name in ("zre", "zim", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.r > 0 or not math.isfinite(self.r):
            raise ValueError(f"height must be positive and finite, got {self.r}")

    @property
    def z(self) -> complex:
        return complex(self.zre, self.zim)

    def quaternion(self) -> Quaternion:
        return Quaternion(self.zre, self.zim, self.r, 0.0)

    def exact(self) -> tuple[Fraction, Fraction, Fraction]:
        """The coordinates as exact dyadic rationals."""
        return Fraction(self.zre), Fraction(self.zim), Fraction(self.r)

    def __str__(self):
        return f"{self.zre!r},{self.zim!r},{self.r!r}"

    @classmethod
    def parse(cls, text: str) -> H3Point:
        parts = [p for p in text.strip().split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'x,y,r', got {text!r}")
        return cls(*(float(p) for p in parts))

    @classmethod
    def from_quaternion(cls, q: Quaternion, tol: float = 1e-9) -> H3Point:
        scale = max(1.0, q.norm())
        if abs(q.w) > tol * scale:
            raise ValueError(f"quaternion {q} has a k-component; not in H^3")
        return cls(q.x, q.y, q.z)


J = H3Point(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ComplexMatrix2:
    a: complex
    b: complex
    c: complex
    d: complex
    det: complex = field(init=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "det", self.a * self.d - self.b * self.c)

    @classmethod
    def of(cls, g) -> ComplexMatrix2:
        if isinstance(g, ComplexMatrix2):
            return g
        if hasattr(g, "a") and hasattr(g, "d"):
            return cls(complex(g.a), complex(g.b), complex(g.c), complex(g.d))
        (a, b), (c, d) = g
        return cls(complex(a), complex(b), complex(c), complex(d))

    def __matmul__(self, o: ComplexMatrix2) -> ComplexMatrix2:
        return ComplexMatrix2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def scaled(self, s: complex) -> ComplexMatrix2:
        return ComplexMatrix2(self.a * s, self.b * s, self.c * s, self.d * s)

    def inverse(self) -> ComplexMatrix2:
        if self.det == 0:
            raise ZeroDivisionError("singular matrix")
        return ComplexMatrix2(self.d, -self.b, -self.c, self.a).scaled(1 / self.det)


def principal_sqrt(l: complex) -> complex:
    """Square root with 0 <= arg < pi."""
    s = cmath.sqrt(complex(l))
    if s.imag < 0 or (s.imag == 0 and s.real < 0):
        s = -s
    return s


def act(g, P: H3Point) -> H3Point:
    """g P = (aP + b)(cP + d)^{-1} after scaling g into SL2(C)."""
    g = ComplexMatrix2.of(g)
    if g.det == 0:
        raise ValueError("singular matrix does not act")
    gn = g.scaled(1 / principal_sqrt(g.det))
    q = P.quaternion()
    num = gn.a * q + Quaternion.from_complex(gn.b)
    den = gn.c * q + Quaternion.from_complex(gn.d)
    out = qmul(num, qinv(den))
    r = out.z
    # the height is more accurate through the ratio formula
    r_exact = P.r * abs(g.det) / (abs(g.c * P.z + g.d) ** 2 + abs(g.c * P.r) ** 2)
    if abs(r - r_exact) > 1e-6 * r_exact:
        raise ArithmeticError("quaternion action lost precision")
    return H3Point(out.x, out.y, r_exact)


def im_ratio(g, P: H3Point) -> float:
    """Im(gP)/Im(P) = |det g| / (|cz + d|^2 + |c r|^2)."""
    g = ComplexMatrix2.of(g)
    if g.det == 0:
        raise ValueError("singular matrix")
    return abs(g.det) / (abs(g.c * P.z + g.d) ** 2 + abs(g.c * P.r) ** 2)


def point_pair_u(P1: H3Point, P2: H3Point) -> float:
    """u(P1, P2) = |P1 - P2|^2 / (2 Im P1 Im P2) = cosh(dist) - 1."""
    d2 = (P1.zre - P2.zre) ** 2 + (P1.zim - P2.zim) ** 2 + (P1.r - P2.r) ** 2
    return d2 / (2.0 * P1.r * P2.r)


def u_via_normalized(gamma, P: H3Point) -> float:
    """u(gamma P, P) through |a'P + b' - P c' P - P d'|^2 / (2 r^2).

    The normalized entries use the branch 0 <= arg(sqrt(det)) < pi.
    """
    g = ComplexMatrix2.of(gamma)
    if g.det == 0:
        raise ValueError("singular matrix")
    s = principal_sqrt(g.det)
    a, b, c, d = g.a / s, g.b / s, g.c / s, g.d / s
    q = P.quaternion()
    Q = a * q + Quaternion.from_complex(b) - qmul(q, c * q) - qmul(q, Quaternion.from_complex(d))
    return Q.norm2() / (2.0 * P.r * P.r)
