"""Exact arithmetic in the Gaussian integers Z[i].

Everything here works on Python ints, so results are exact at any size.
Canonical associates lie in the first quadrant (re > 0, im >= 0).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

__all__ = [
    "gcd_inverse_raw",
    "GaussianInt",
    "Level",
    "ApproxResult",
    "UNITS",
    "gnorm",
    "ggcd",
    "gxgcd",
    "is_gaussian_prime",
    "factor",
    "divisors",
    "ideal_divisors",
    "is_squarefree",
    "gsqrt",
    "prime_set",
    "dirichlet_approx",
    "projective_index",
    "residues",
    "as_gaussian",
]


@dataclass(frozen=True, slots=True, order=True)
class GaussianInt:
    re: int
    im: int = 0

    def __post_init__(self):
        if not isinstance(self.re, int) or not isinstance(self.im, int):
            object.__setattr__(self, "re", _as_int(self.re))
            object.__setattr__(self, "im", _as_int(self.im))

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = as_gaussian(other)
        return GaussianInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_gaussian(other)
        return GaussianInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return as_gaussian(other) - self

    def __mul__(self, other):
        o = as_gaussian(other)
        return GaussianInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not Gaussian integers")
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __floordiv__(self, other):
        """Nearest-integer quotient (Euclidean division in Z[i])."""
        return self.divround(as_gaussian(other))

    def __mod__(self, other):
        o = as_gaussian(other)
        return self - o * self.divround(o)

    def __complex__(self):
        return complex(self.re, self.im)

    def __abs__(self):
        return math.sqrt(self.norm())

    def __bool__(self):
        return bool(self.re or self.im)

    def __str__(self):
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __repr__(self):
        return f"GaussianInt({self.re}, {self.im})"

    # helpers --------------------------------------------------------------
    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def conj(self) -> GaussianInt:
        return GaussianInt(self.re, -self.im)

    def is_unit(self) -> bool:
        return self.norm() == 1

    def divround(self, d: GaussianInt) -> GaussianInt:
        n = d.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[i]")
        x = self.re * d.re + self.im * d.im
        y = self.im * d.re - self.re * d.im
        # floor((2x + n) / 2n) rounds half up, deterministically
        return GaussianInt((2 * x + n) // (2 * n), (2 * y + n) // (2 * n))

    def divides(self, other: GaussianInt) -> bool:
        n = self.norm()
        if n == 0:
            return not as_gaussian(other)
        o = as_gaussian(other)
        x = o.re * self.re + o.im * self.im
        y = o.im * self.re - o.re * self.im
        return x % n == 0 and y % n == 0

    def exact_div(self, d: GaussianInt) -> GaussianInt:
        n = d.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Z[i]")
        x = self.re * d.re + self.im * d.im
        y = self.im * d.re - self.re * d.im
        if x % n or y % n:
            raise ValueError(f"{d} does not divide {self}")
        return GaussianInt(x // n, y // n)

    def canonical(self) -> GaussianInt:
        """First-quadrant associate (re > 0, im >= 0); zero maps to itself."""
        a, b = self.re, self.im
        if a == 0 and b == 0:
            return self
        for _ in range(4):
            if a > 0 and b >= 0:
                return GaussianInt(a, b)
            a, b = -b, a  # multiply by i
        raise AssertionError("unreachable")

    def unit_to_canonical(self) -> GaussianInt:
        """The unit u with u * self == self.canonical()."""
        for u in UNITS:
            if (u * self) == self.canonical():
                return u
        raise ValueError("zero has no canonical unit")

    @classmethod
    def parse(cls, text: str) -> GaussianInt:
        return parse_gaussian(text)


def _as_int(x) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, float) and x.is_integer():
        return int(x)
    raise TypeError(f"Gaussian integer components must be integers, got {x!r}")


ZERO = GaussianInt(0, 0)
ONE = GaussianInt(1, 0)
I = GaussianInt(0, 1)
UNITS = (GaussianInt(1, 0), GaussianInt(0, 1), GaussianInt(-1, 0), GaussianInt(0, -1))


def as_gaussian(x) -> GaussianInt:
    if isinstance(x, GaussianInt):
        return x
    if isinstance(x, (int, np.integer)):
        return GaussianInt(int(x), 0)
    if isinstance(x, complex):
        return GaussianInt(_as_int(x.real), _as_int(x.imag))
    if isinstance(x, str):
        return parse_gaussian(x)
    if isinstance(x, tuple) and len(x) == 2:
        return GaussianInt(*x)
    raise TypeError(f"cannot interpret {x!r} as a Gaussian integer")


_GAUSS_RE = re.compile(r"^([+-]?\d+)?(?:([+-])(\d*)i)?$|^([+-]?)(\d*)i$")


def parse_gaussian(text: str) -> GaussianInt:
    """Parse "a+bi", "a-bi", "a", "bi", "i", "-i" (no spaces inside)."""
    s = text.strip().replace(" ", "")
    m = _GAUSS_RE.match(s)
    if not s or not m:
        raise ValueError(f"not a Gaussian integer: {text!r}")
    if m.group(4) is not None or (m.group(1) is None and m.group(2) is None):
        sign, digits = m.group(4) or "", m.group(5) or ""
        if m.group(4) is None and m.group(5) is None:
            raise ValueError(f"not a Gaussian integer: {text!r}")
        im = int(digits) if digits else 1
        return GaussianInt(0, -im if sign == "-" else im)
    re_part = int(m.group(1)) if m.group(1) is not None else 0
    if m.group(2) is None:
        return GaussianInt(re_part, 0)
    im = int(m.group(3)) if m.group(3) else 1
    return GaussianInt(re_part, -im if m.group(2) == "-" else im)


def gnorm(n) -> int:
    return as_gaussian(n).norm()


def ggcd(a, b) -> GaussianInt:
    """Greatest common divisor, normalized to the first quadrant."""
    a, b = as_gaussian(a), as_gaussian(b)
    if not a and not b:
        raise ValueError("gcd(0, 0) is undefined")
    while b:
        a, b = b, a - b * a.divround(b)
    return a.canonical()


def gxgcd(a, b) -> tuple[GaussianInt, GaussianInt, GaussianInt]:
    """Return (g, x, y) with x*a + y*b == g and g = ggcd(a, b)."""
    a, b = as_gaussian(a), as_gaussian(b)
    if not a and not b:
        raise ValueError("gcd(0, 0) is undefined")
    x0, y0, x1, y1 = ONE, ZERO, ZERO, ONE
    while b:
        q = a.divround(b)
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    u = a.unit_to_canonical()
    return a * u, x0 * u, y0 * u


def _is_rational_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    for k in range(3, math.isqrt(p) + 1, 2):
        if p % k == 0:
            return False
    return True


def is_gaussian_prime(n) -> bool:
    n = as_gaussian(n)
    nn = n.norm()
    if _is_rational_prime(nn):
        return True
    # associates of rational primes p = 3 mod 4
    a, b = abs(n.re), abs(n.im)
    p = max(a, b)
    return min(a, b) == 0 and p % 4 == 3 and _is_rational_prime(p)


def _rational_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    k = 2
    while k * k <= n:
        while n % k == 0:
            out[k] = out.get(k, 0) + 1
            n //= k
        k += 1 if k == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def _split_prime(p: int) -> GaussianInt:
    """Canonical Gaussian prime above a rational prime p = 1 mod 4 (or p = 2)."""
    if p == 2:
        return GaussianInt(1, 1)
    for g in range(2, p):
        x = pow(g, (p - 1) // 4, p)
        if x * x % p == p - 1:
            return ggcd(GaussianInt(p, 0), GaussianInt(x, 1))
    raise ValueError(f"{p} is not 1 mod 4")


def factor(n) -> tuple[GaussianInt, dict[GaussianInt, int]]:
    """Return (unit, {canonical prime: exponent}) with n = unit * prod p^e."""
    n = as_gaussian(n)
    if not n:
        raise ValueError("cannot factor zero")
    primes: dict[GaussianInt, int] = {}
    rest = n
    for p, _ in sorted(_rational_factor(n.norm()).items()):
        if p % 4 == 3:
            cands = [GaussianInt(p, 0)]
        else:
            pi = _split_prime(p)
            cands = [pi] if p == 2 else [pi, pi.conj().canonical()]
        for pi in cands:
            while pi.divides(rest):
                rest = rest.exact_div(pi)
                primes[pi] = primes.get(pi, 0) + 1
    assert rest.is_unit(), rest
    return rest, dict(sorted(primes.items()))


def is_squarefree(n) -> bool:
    n = as_gaussian(n)
    if not n:
        return False
    return all(e == 1 for e in factor(n)[1].values())


def ideal_divisors(n) -> list[GaussianInt]:
    """Canonical generators of the ideals dividing (n), sorted by (norm, value)."""
    _, fac = factor(n)
    out = [ONE]
    for p, e in fac.items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted((d.canonical() for d in out), key=lambda d: (d.norm(), d.re, d.im))


def divisors(n) -> list[GaussianInt]:
    """All divisors of n, associates included (so the count is divisible by 4)."""
    n = as_gaussian(n)
    if not n:
        raise ValueError("zero has infinitely many divisors")
    return [u * d for d in ideal_divisors(n) for u in UNITS]


def gsqrt(n) -> GaussianInt | None:
    """A square root of n in Z[i] (canonical-ish: re > 0 or re == 0, im > 0), or None."""
    n = as_gaussian(n)
    if not n:
        return ZERO
    m = math.isqrt(n.norm())
    if m * m != n.norm():
        return None
    # x^2 - y^2 = re, x^2 + y^2 = m
    s, t = m + n.re, m - n.re
    if s % 2 or t % 2:
        return None
    x, y = math.isqrt(s // 2), math.isqrt(t // 2)
    for cand in (GaussianInt(x, y), GaussianInt(x, -y)):
        if cand * cand == n:
            return cand if (cand.re > 0 or (cand.re == 0 and cand.im > 0)) else -cand
    return None


def residues(m) -> list[GaussianInt]:
    """Canonical residue system of Z[i]/(m): k with k/m in [-1/2, 1/2)^2."""
    m = as_gaussian(m)
    n = m.norm()
    if n == 0:
        raise ValueError("modulus must be nonzero")
    out = []
    bound = math.isqrt(n) + 1
    for a in range(-bound, bound + 1):
        for b in range(-bound, bound + 1):
            k = GaussianInt(a, b)
            if k.divround(m) == ZERO:
                out.append(k)
    assert len(out) == n
    return out


@dataclass(frozen=True)
class Level:
    """A level N in Z[i]; squarefree flag and index #P^1(O/N) are derived."""

    n: GaussianInt
    squarefree: bool = field(init=False)
    index: int = field(init=False)

    def __post_init__(self):
        n = as_gaussian(self.n)
        if not n:
            raise ValueError("level must be nonzero")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "squarefree", is_squarefree(n))
        object.__setattr__(self, "index", projective_index(n))

    @classmethod
    def of(cls, n) -> Level:
        return n if isinstance(n, Level) else cls(as_gaussian(n))

    @property
    def absval(self) -> float:
        return abs(self.n)

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class ApproxResult:
    p: GaussianInt
    q: GaussianInt
    error: float
    qbound: float


DIRICHLET_C = 2.0


def dirichlet_approx(w: complex, Q: float) -> ApproxResult:
    """Best p/q over all 1 <= |q| <= Q by brute force, minimizing |q w - p|.

    The minimizer is automatically primitive, and satisfies
    |w - p/q| <= 2 / (|q| Q).
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    w = complex(w)
    qmax = int(math.floor(Q))
    best = None
    for a in range(0, qmax + 1):
        # first-quadrant q only: associates give the same |qw - p|
        bmax = math.isqrt(int(math.floor(Q * Q)) - a * a) if a * a <= Q * Q else -1
        b = np.arange(0, bmax + 1)
        if a == 0:
            b = b[b > 0]
        if b.size == 0:
            continue
        q = a + 1j * b
        qw = q * w
        p = np.round(qw.real) + 1j * np.round(qw.imag)
        dist = np.abs(qw - p)
        # canonical first quadrant means re > 0; a == 0 rows are i * (b, 0)
        k = int(np.argmin(dist))
        key = (dist[k], abs(q[k]))
        if best is None or key < best[0]:
            best = (key, q[k], p[k])
    assert best is not None
    _, qc, pc = best
    q = GaussianInt(int(qc.real), int(qc.imag))
    p = GaussianInt(int(pc.real), int(pc.imag))
    u = q.unit_to_canonical()
    q, p = q * u, p * u
    g = ggcd(p, q)
    if not g.is_unit():
        p, q = p.exact_div(g), q.exact_div(g)
    err = abs(w - complex(p) / complex(q))
    return ApproxResult(p=p, q=q, error=err, qbound=float(Q))


def projective_index(n) -> int:
    """#P^1(O_K/N) by direct enumeration of primitive pairs modulo N."""
    n = as_gaussian(n.n if isinstance(n, Level) else n)
    if not n:
        raise ValueError("level must be nonzero")
    if n.is_unit():
        return 1
    res = residues(n)
    units = [x for x in res if ggcd(x, n).is_unit()]
    prim = 0
    for x in res:
        gx = ggcd(x, n) if x else n.canonical()
        for y in res:
            if gx.is_unit() or (ggcd(gx, y) if y else gx).is_unit():
                prim += 1
    assert prim % len(units) == 0
    return prim // len(units)


def prime_set(L: float, N) -> list[GaussianInt]:
    """Primes l with l not dividing 2N, 0 < arg l < pi/4, L <= |l|^2 <= 2L."""
    N = as_gaussian(N.n if isinstance(N, Level) else N)
    two_n = N * 2
    lo, hi = math.ceil(L), math.floor(2 * L)
    out = []
    for a in range(1, math.isqrt(max(hi, 0)) + 1):
        for b in range(1, a):  # a > b > 0 <=> 0 < arg < pi/4
            nn = a * a + b * b
            if nn < lo or nn > hi:
                continue
            l = GaussianInt(a, b)
            if is_gaussian_prime(l) and not l.divides(two_n):
                out.append(l)
    return sorted(out, key=lambda l: (l.norm(), math.atan2(l.im, l.re)))


def iter_disk(center: complex, radius: float) -> Iterable[GaussianInt]:
    """Gaussian integers k with |k - center| <= radius (with a tiny float margin)."""
    if radius < 0:
        return
    r2 = radius * radius * (1 + 1e-12) + 1e-12
    cx, cy = center.real, center.imag
    for a in range(math.ceil(cx - radius - 1e-9), math.floor(cx + radius + 1e-9) + 1):
        rem = r2 - (a - cx) ** 2
        if rem < 0:
            continue
        h = math.sqrt(rem)
        for b in range(math.ceil(cy - h), math.floor(cy + h) + 1):
            yield GaussianInt(a, b)


def gcd_inverse_raw(ar: int, ai: int, br: int, bi: int) -> tuple[int, int, int, int]:
    """(gr, gi, xr, xi) with x a = g (mod b) and g a gcd of a and b, unnormalized.

    Works on bare integer pairs so that tight loops avoid object churn.
    """
    x0r, x0i, x1r, x1i = 1, 0, 0, 0
    while br or bi:
        n = br * br + bi * bi
        pr = ar * br + ai * bi
        pi = ai * br - ar * bi
        qr = (2 * pr + n) // (2 * n)
        qi = (2 * pi + n) // (2 * n)
        ar, ai, br, bi = br, bi, ar - (qr * br - qi * bi), ai - (qr * bi + qi * br)
        x0r, x0i, x1r, x1i = x1r, x1i, x0r - (qr * x1r - qi * x1i), x0i - (qr * x1i + qi * x1r)
    return ar, ai, x0r, x0i
