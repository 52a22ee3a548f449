"""K-Bessel functions of imaginary order, the Gaussian circle count, and
truncated Fourier expansions r sum rho(n) K_it(2 pi |n| r) e(Re(nz)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import mpmath
import numpy as np
from scipy import integrate

from .gaussian import GaussianInt, parse_gaussian
from .h3geom import H3Point

__all__ = [
    "bessel_k",
    "bessel_k_series",
    "bessel_regime_check",
    "RegimeReport",
    "circle_count",
    "CoefficientTable",
    "ExpansionResult",
    "eval_expansion",
    "TRUNC_EPS",
]

# below this x the integral representation is not trusted
X_MIN = 1e-8
# cancellation (in decimal digits) tolerated before switching to mpmath
MAX_LOST_DIGITS = 3.0
TRUNC_EPS = 1e-12


def _upper_limit(x: float, decay: float = 60.0) -> float:
    # e^{-x (cosh u - 1)} < e^{-decay} beyond this u
    return math.acosh(1.0 + decay / x)


def _lost_digits(t: float, x: float) -> float:
    return max(0.0, (math.pi * abs(t) / 2 - x) / math.log(10))


def _bessel_k_double(t: float, x: float) -> float:
    U = _upper_limit(x)

    def f(u):
        return math.exp(-x * (math.cosh(u) - 1.0))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        if t == 0:
            val, _ = integrate.quad(f, 0.0, U, epsabs=0.0, epsrel=1e-13, limit=400)
        else:
            val, _ = integrate.quad(f, 0.0, U, weight="cos", wvar=t, epsabs=0.0, epsrel=1e-13, limit=400)
    return val * math.exp(-x)


def _bessel_k_mp(t: float, x: float) -> float:
    digits = _lost_digits(t, x)
    with mpmath.workdps(int(25 + digits)):
        tt, xx = mpmath.mpf(t), mpmath.mpf(x)
        U = mpmath.acosh(1 + mpmath.mpf(60 + digits * 2.31) / xx)
        npts = max(2, int(U * abs(tt) / mpmath.pi) + 2)
        pts = mpmath.linspace(0, U, npts)
        val = mpmath.quad(lambda u: mpmath.exp(-xx * (mpmath.cosh(u) - 1)) * mpmath.cos(tt * u), pts)
        return float(val * mpmath.exp(-xx))


def bessel_k(t: float, x: float) -> float:
    """K_{it}(x) = integral over u > 0 of e^{-x cosh u} cos(tu).

    Double-precision oscillatory quadrature when little cancellation occurs,
    otherwise extended-precision quadrature with breakpoints at the zeros
    of cos(tu).
    """
    t, x = abs(float(t)), float(x)
    if not x > 0:
        raise ValueError("x must be positive")
    if x < X_MIN:
        raise ArithmeticError(f"quadrature not certified for x = {x} < {X_MIN}")
    if _lost_digits(t, x) <= MAX_LOST_DIGITS:
        try:
            return _bessel_k_double(t, x)
        except integrate.IntegrationWarning:
            pass
    return _bessel_k_mp(t, x)


def bessel_k_series(t: float, x: float) -> float:
    """K_{it}(x) from ascending series of I_{+-it} (or of K_0 when t = 0).

    Independent of bessel_k; precision is raised to absorb cancellation.
    """
    t, x = abs(float(t)), float(x)
    extra = int((2 * x + math.pi * t / 2) / math.log(10)) + 20
    with mpmath.workdps(15 + extra):
        xx = mpmath.mpf(x)
        q = (xx / 2) ** 2
        tol = mpmath.mpf(10) ** (-(15 + extra))
        if t == 0:
            # K0 = -(log(x/2) + gamma) I0 + sum q^k/(k!)^2 H_k
            i0, s, term, H, k = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(0), 0
            while True:
                k += 1
                term *= q / (k * k)
                H += mpmath.mpf(1) / k
                i0 += term
                s += term * H
                if term * max(H, 1) < tol * abs(i0):
                    break
            return float(-(mpmath.log(xx / 2) + mpmath.euler) * i0 + s)
        nu = mpmath.mpc(0, t)

        def I(v):
            term = (xx / 2) ** v / mpmath.gamma(v + 1)
            total, k = term, 0
            while True:
                k += 1
                term *= q / (k * (k + v))
                total += term
                if abs(term) < tol * abs(total) and k > x:
                    return total

        val = mpmath.pi / (2 * mpmath.sin(nu * mpmath.pi)) * (I(-nu) - I(nu))
        return float(mpmath.re(val))


@dataclass
class RegimeReport:
    t: float
    r: float
    sampled: int
    constants: dict  # regime name -> sup of cosh(pi t / 2)|K| / envelope
    worst: dict  # regime name -> |n| attaining the sup

    @property
    def finite(self) -> bool:
        return all(math.isfinite(c) for c in self.constants.values())


def _regime_envelope(t: float, m: float, r: float, eps: float) -> tuple[str, float]:
    T = max(1.0, t)
    if m > T / r:
        return "exp_decay", math.exp(-m * r)
    if T > 1:
        gap = abs((2 * math.pi * m * r) ** 2 - t * t)
        env = t ** (-1 / 3) if gap == 0 else min(t ** (-1 / 3), gap ** (-0.25))
        return "transition", env
    return "small_t", (m * r) ** (-eps)


def bessel_regime_check(t: float, r: float, samples: int = 200, eps: float = 0.05, seed: int = 0) -> RegimeReport:
    """Measured constants of the three-regime bound for cosh(pi t/2) K_it(2 pi |n| r).

    |n| runs over norms of Gaussian integers, half of them drawn below T/r
    and half in (T/r, T/r + 40/r].
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    T = max(1.0, t)
    rng = np.random.default_rng(seed)
    hi = (T / r) + 40.0 / r
    ks = set()
    split = (T / r) ** 2
    for _ in range(samples):
        lo_k, hi_k = (1, max(2, int(split))) if rng.random() < 0.5 else (int(split) + 1, int(hi * hi) + 1)
        k = int(rng.integers(lo_k, hi_k + 1))
        # move to the nearest sum of two squares at or above k
        while not _is_sum_two_squares(k):
            k += 1
        ks.add(k)
    consts: dict = {}
    worst: dict = {}
    scale = math.cosh(math.pi * t / 2)
    for k in sorted(ks):
        m = math.sqrt(k)
        name, env = _regime_envelope(t, m, r, eps)
        val = scale * abs(bessel_k(t, 2 * math.pi * m * r)) / env
        if val > consts.get(name, -1.0):
            consts[name] = val
            worst[name] = m
    return RegimeReport(t, r, len(ks), consts, worst)


@lru_cache(maxsize=None)
def _is_sum_two_squares(k: int) -> bool:
    a = 0
    while a * a <= k:
        b = math.isqrt(k - a * a)
        if b * b == k - a * a:
            return True
        a += 1
    return False


def circle_count(X: float) -> int:
    """#{n in Z[i] : 1 <= |n| <= X}, exactly."""
    if X < 0:
        raise ValueError("X must be nonnegative")
    F = math.floor(Fraction(X) ** 2)
    m = math.isqrt(F)
    total = 0
    for a in range(-m, m + 1):
        total += 2 * math.isqrt(F - a * a) + 1
    return total - 1


@dataclass
class CoefficientTable:
    """rho(n) for 1 <= |n| <= cutoff; absent entries are zero."""

    values: dict = field(default_factory=dict)
    cutoff: float = 0.0

    def __post_init__(self):
        sym: dict = {}
        for n, v in self.values.items():
            n = n if isinstance(n, GaussianInt) else parse_gaussian(str(n))
            v = complex(v)
            for key in (n, -n):
                if key in sym and sym[key] != v:
                    raise ValueError(f"coefficients violate rho(-n) = rho(n) at {n}")
                sym[key] = v
        self.values = sym
        if not self.cutoff:
            self.cutoff = max((abs(n) for n in sym), default=0.0)

    @classmethod
    def from_file(cls, path, cutoff: float = 0.0) -> CoefficientTable:
        vals = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'n re im', got {line!r}")
            vals[parse_gaussian(parts[0])] = complex(float(parts[1]), float(parts[2]))
        return cls(vals, cutoff)

    def __getitem__(self, n: GaussianInt) -> complex:
        return self.values.get(n, 0j)


@dataclass(frozen=True)
class ExpansionResult:
    value: complex
    truncation: float
    tail_estimate: float
    sufficient: bool
    terms: int


def eval_expansion(P: H3Point, coeffs: CoefficientTable, t: float) -> ExpansionResult:
    """r sum_{n != 0} rho(n) K_it(2 pi |n| r) e(Re(nz)) truncated where e^{-|n|r} < 1e-12."""
    r = P.r
    T = max(1.0, abs(t))
    X = (math.log(1 / TRUNC_EPS) + T) / r
    total = 0j
    terms = 0
    cache: dict[int, float] = {}
    rho_max = 0.0
    for n in sorted(coeffs.values, key=lambda g: (g.norm(), g.re, g.im)):
        rho = coeffs.values[n]
        if rho == 0:
            continue
        rho_max = max(rho_max, abs(rho))
        k = n.norm()
        if math.sqrt(k) > X:
            continue
        if k not in cache:
            cache[k] = bessel_k(t, 2 * math.pi * math.sqrt(k) * r)
        phase = 2 * math.pi * (n.re * P.zre - n.im * P.zim)
        total += rho * cache[k] * complex(math.cos(phase), math.sin(phase))
        terms += 1
    total *= r
    # r * rho_max * sum_{|n| > X} e^{-|n| r} <= 2 pi rho_max (X r + 1) e^{-X r} / r
    tail = 2 * math.pi * rho_max * (X * r + 1) * math.exp(-X * r) / r
    return ExpansionResult(total, X, tail, coeffs.cutoff >= X, terms)
