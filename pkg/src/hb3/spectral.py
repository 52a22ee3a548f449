"""The test-function triple g, h, k and numerical checks of their properties.

g(x) = A cos(Tx) / (2 pi cosh(Ax)), h is its Fourier transform and
k(u) = -g'(v) / (2 pi sinh v) with cosh v = 1 + u.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

__all__ = [
    "SpectralParams",
    "TestFunctionPair",
    "g_fn",
    "g_prime",
    "h_fn",
    "h_fn_ratio",
    "k_fn",
    "k_via_g",
    "v_of_u",
    "fourier_h",
    "boundk_constant",
    "boundh_window",
    "verify_pair",
    "PairReport",
]


@dataclass(frozen=True)
class SpectralParams:
    T: float = 1.0
    A: float = 3.0

    def __post_init__(self):
        if not self.T >= 1:
            raise ValueError(f"T must be at least 1, got {self.T}")
        if not self.A > 2:
            raise ValueError(f"A must exceed 2, got {self.A}")

    @classmethod
    def from_t(cls, t: float, A: float = 3.0) -> SpectralParams:
        return cls(max(1.0, abs(t)), A)


def g_fn(x, p: SpectralParams):
    x = np.asarray(x, dtype=float)
    out = p.A * np.cos(p.T * x) / (2 * np.pi * np.cosh(p.A * x))
    return float(out) if out.ndim == 0 else out


def g_prime(x, p: SpectralParams):
    """Derivative of g, differentiated by hand."""
    x = np.asarray(x, dtype=float)
    A, T = p.A, p.T
    out = -A / (2 * np.pi) * (T * np.sin(T * x) + A * np.cos(T * x) * np.tanh(A * x)) / np.cosh(A * x)
    return float(out) if out.ndim == 0 else out


def _check_strip(t: complex, p: SpectralParams):
    if abs(t.imag) >= p.A:
        raise ValueError(f"h has poles for |Im t| >= A = {p.A}; got t = {t}")


def _sech(w: complex) -> complex:
    return 1 / cmath.cosh(w)


def h_fn(t, p: SpectralParams) -> complex:
    """Sum of two shifted sech bumps centered at +-T."""
    t = complex(t)
    _check_strip(t, p)
    s = math.pi / (2 * p.A)
    return 0.25 * _sech(s * (t + p.T)) + 0.25 * _sech(s * (t - p.T))


def h_fn_ratio(t, p: SpectralParams) -> complex:
    """The same function as a ratio of hyperbolic cosines."""
    t = complex(t)
    _check_strip(t, p)
    s = math.pi / (2 * p.A)
    num = cmath.cosh(s * t) * math.cosh(s * p.T)
    return num / (cmath.cosh(2 * s * t) + math.cosh(2 * s * p.T))


def v_of_u(u):
    u = np.asarray(u, dtype=float)
    return np.log1p(u + np.sqrt(u * u + 2 * u))


# x -> sin(x)/x, tanh(x)/x, sinh(x)/x with Taylor branches near 0
_SMALL = 1e-4


def _sinc(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(np.abs(x) < _SMALL, 1.0, x)
    return np.where(np.abs(x) < _SMALL, 1 - x * x / 6 + x**4 / 120, np.sin(safe) / safe)


def _tanhc(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(np.abs(x) < _SMALL, 1.0, x)
    return np.where(np.abs(x) < _SMALL, 1 - x * x / 3 + 2 * x**4 / 15, np.tanh(safe) / safe)


def _sinhc(x):
    x = np.asarray(x, dtype=float)
    safe = np.where(np.abs(x) < _SMALL, 1.0, x)
    return np.where(np.abs(x) < _SMALL, 1 + x * x / 6 + x**4 / 120, np.sinh(safe) / safe)


def k_fn(u, p: SpectralParams):
    """k(u), with the factor v cancelled so that u = 0 gives (AT^2 + A^3)/(4 pi^2)."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("k is defined for u >= 0")
    A, T = p.A, p.T
    v = v_of_u(u)
    num = T * T * _sinc(T * v) + A * A * np.cos(T * v) * _tanhc(A * v)
    out = A * num / (4 * np.pi**2 * _sinhc(v) * np.cosh(A * v))
    return float(out) if out.ndim == 0 else out


def k_via_g(u, p: SpectralParams):
    """-g'(v) / (2 pi sqrt(u^2 + 2u)) for u > 0."""
    u = np.asarray(u, dtype=float)
    out = -g_prime(v_of_u(u), p) / (2 * np.pi * np.sqrt(u * u + 2 * u))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class TestFunctionPair:
    params: SpectralParams

    def g(self, x):
        return g_fn(x, self.params)

    def h(self, t):
        return h_fn(t, self.params)

    def k(self, u):
        return k_fn(u, self.params)


def fourier_h(t: float, p: SpectralParams, eps: float = 1e-12) -> tuple[float, float, bool]:
    """Integral of g(x) e^{itx} over R by oscillatory quadrature on [0, X].

    Returns (value, error estimate including the tail, converged). The tail
    beyond X is at most (2/pi) e^{-AX}, and X is chosen to push it below eps.
    """
    A, T = p.A, p.T
    X = math.log(2 / (math.pi * eps)) / A
    total, err, ok = 0.0, 0.0, True

    def f(x):
        return 1.0 / math.cosh(A * x)

    # g(x) cos(tx) = (A / 4 pi) [cos((T+t)x) + cos((T-t)x)] / cosh(Ax)
    for w in (T + t, T - t):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, e = integrate.quad(f, 0.0, X, weight="cos", wvar=w, limit=200)
            except integrate.IntegrationWarning:
                val, e = integrate.quad(f, 0.0, X, weight="cos", wvar=w, limit=200)
                ok = False
        total += val
        err += e
    scale = A / (2 * math.pi)  # two halves of the line times A/(4 pi)
    tail = 2 / math.pi * math.exp(-A * X)
    return scale * total, scale * err + tail, ok


def boundk_constant(p: SpectralParams, umin: float = 1e-8, umax: float = 1e3, n: int = 2001) -> float:
    """sup |k(u)| / min(T^2, T / (sqrt(u) (1+u)^A)) over a log grid."""
    u = np.logspace(math.log10(umin), math.log10(umax), n)
    env = np.minimum(p.T**2, p.T / (np.sqrt(u) * np.exp(p.A * np.log1p(u))))
    return float(np.max(np.abs(k_fn(u, p)) / env))


def boundh_window(p: SpectralParams, n: int = 1000, seed: int = 0) -> tuple[float, int]:
    """Minimum of h over random points of the window where h should exceed 1/8.

    The window is t real or purely imaginary with |t| in (T - A/2, T + A/2)
    and |Im t| < A/2. Returns (minimum, number of points sampled).
    """
    rng = np.random.default_rng(seed)
    lo, hi = max(p.T - p.A / 2, 0.0), p.T + p.A / 2
    vals = []
    for _ in range(n):
        mag = rng.uniform(lo, hi)
        if mag in (lo, hi):
            continue
        sign = rng.choice([-1.0, 1.0])
        if rng.random() < 0.5 or mag >= p.A / 2:
            t = complex(sign * mag, 0.0)
        else:
            t = complex(0.0, sign * mag)
        vals.append(h_fn(t, p).real)
    return float(min(vals)), len(vals)


@dataclass
class PairReport:
    params: SpectralParams
    records: list[tuple[float, float, float, float]] = field(default_factory=list)  # t, h, ft, err
    ft_max_dev: float = 0.0
    converged: bool = True
    h_min_real: float = math.inf
    h_min_imag: float = math.inf
    window_min: float = math.inf
    forms_max_dev: float = 0.0
    k_max_rel_dev: float = 0.0  # relative to k(0)
    boundk_C: float = 0.0

    @property
    def ok(self) -> bool:
        return (
            self.converged
            and self.ft_max_dev <= 1e-6
            and self.h_min_real > 0
            and self.h_min_imag > 0
            and self.window_min > 1 / 8
            and self.forms_max_dev <= 1e-12
            and math.isfinite(self.boundk_C)
        )


def verify_pair(p: SpectralParams, t_grid=None, window_samples: int = 1000, seed: int = 0) -> PairReport:
    """Cross-check h against the quadrature of g and test positivity and windows."""
    if t_grid is None:
        t_grid = np.linspace(-20.0, 20.0, 401)
    rep = PairReport(p)
    for t in t_grid:
        t = float(t)
        h = h_fn(t, p).real
        ft, err, ok = fourier_h(t, p)
        rep.records.append((t, h, ft, err))
        rep.ft_max_dev = max(rep.ft_max_dev, abs(ft - h))
        rep.converged &= ok
        rep.h_min_real = min(rep.h_min_real, h)
        rep.forms_max_dev = max(rep.forms_max_dev, abs(h_fn(t, p) - h_fn_ratio(t, p)))
    # approach the pole line along the imaginary axis
    for s in np.concatenate([np.linspace(-0.999, 0.999, 201), [1 - 1e-6, -(1 - 1e-6)]]):
        t = complex(0.0, s * p.A)
        hv = h_fn(t, p)
        rep.h_min_imag = min(rep.h_min_imag, hv.real)
        if abs(s) < 0.99:
            rep.forms_max_dev = max(rep.forms_max_dev, abs(hv - h_fn_ratio(t, p)) / max(1.0, abs(hv)))
    rep.window_min, _ = boundh_window(p, window_samples, seed)
    u = np.logspace(-8, 3, 500)
    kk, kg = k_fn(u, p), k_via_g(u, p)
    rep.k_max_rel_dev = float(np.max(np.abs(kk - kg)) / k_fn(0.0, p))
    rep.boundk_C = boundk_constant(p)
    return rep
