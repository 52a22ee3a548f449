"""Hecke coset representatives, eigenvalue oracles and the squares-only amplifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .congruence import IntMatrix2
from .gaussian import (
    ONE,
    ZERO,
    GaussianInt,
    Level,
    as_gaussian,
    divisors,
    factor,
    ggcd,
    ideal_divisors,
    parse_gaussian,
    prime_set,
    residues,
)

__all__ = [
    "CosetRep",
    "coset_reps",
    "raw_coset_reps",
    "count_cosets",
    "eisenstein_eigenvalue",
    "EigenvalueOracle",
    "EisensteinOracle",
    "SyntheticHeckeOracle",
    "TableOracle",
    "check_multiplicativity",
    "Amplifier",
    "build_amplifier",
    "AmplifierLower",
    "amplifier_lower",
    "sgn",
]


def _coprime(a: GaussianInt, N: GaussianInt) -> bool:
    if not a:
        return N.is_unit()
    return ggcd(a, N).is_unit()


@dataclass(frozen=True)
class CosetRep:
    a: GaussianInt
    b: GaussianInt
    d: GaussianInt
    n: GaussianInt

    def matrix(self) -> IntMatrix2:
        return IntMatrix2(self.a, self.b, ZERO, self.d)


def coset_reps(n, N=1) -> list[CosetRep]:
    """One upper-triangular representative per coset of R(1) in R(n)."""
    n = as_gaussian(n)
    if not n:
        raise ValueError("n must be nonzero")
    Nn = Level.of(N).n
    out = []
    for a in ideal_divisors(n):
        if not _coprime(a, Nn):
            continue
        d = n.exact_div(a)
        out.extend(CosetRep(a, b, d, n) for b in residues(d))
    return out


def raw_coset_reps(n, N=1) -> list[IntMatrix2]:
    """Every (a, b mod d, d) with ad = n over all divisors a, units included."""
    n = as_gaussian(n)
    Nn = Level.of(N).n
    out = []
    for a in divisors(n):
        if not _coprime(a, Nn):
            continue
        d = n.exact_div(a)
        out.extend(IntMatrix2(a, b, ZERO, d) for b in residues(d))
    return out


def same_coset(g1: IntMatrix2, g2: IntMatrix2, N=1) -> bool:
    """R(1) g1 == R(1) g2, i.e. g1 g2^{-1} is integral with N | c."""
    n = g2.det
    h = g1 @ g2.adjugate()
    if not all(n.divides(e) for e in h.entries()):
        return False
    return Level.of(N).n.divides(h.c.exact_div(n))


def count_cosets(matrices: list[IntMatrix2], N=1) -> int:
    """Number of distinct cosets among the given matrices (quadratic scan)."""
    reps: list[IntMatrix2] = []
    for g in matrices:
        if not any(same_coset(g, h, N) for h in reps):
            reps.append(g)
    return len(reps)


def eisenstein_eigenvalue(n, s: complex) -> complex:
    """(1/4) sum over ordered pairs ad = n of |a|^s |d|^-s."""
    n = as_gaussian(n)
    if not n:
        raise ValueError("n must be nonzero")
    s = complex(s)
    total = 0j
    for a in divisors(n):
        d = n.exact_div(a)
        # |a|^s |d|^-s = (|a|^2 / |d|^2)^(s/2)
        total += (a.norm() / d.norm()) ** (s / 2)
    return total / 4


class EigenvalueOracle(Protocol):
    level: Level

    def __call__(self, n) -> complex | float: ...


def _check_coprime(n: GaussianInt, level: Level):
    if not n or not _coprime(n, level.n):
        raise ValueError(f"eigenvalue at {n} undefined: not coprime to level {level}")


@dataclass(frozen=True)
class EisensteinOracle:
    """lambda(n) for the Eisenstein series with trivial character and parameter s."""

    s: complex = 0j
    level: Level = field(default_factory=lambda: Level.of(1))

    def __call__(self, n):
        n = as_gaussian(n)
        _check_coprime(n, self.level)
        v = eisenstein_eigenvalue(n, self.s)
        return v.real if complex(self.s).real == 0 else v


@dataclass(frozen=True)
class SyntheticHeckeOracle:
    """Random values in [-2, 2] at primes, extended by the Hecke relations.

    Values at a prime are a pure function of (seed, prime), so the oracle
    is reproducible and safe to share between threads.
    """

    seed: int = 0
    level: Level = field(default_factory=lambda: Level.of(1))

    def at_prime(self, p: GaussianInt) -> float:
        p = p.canonical()
        rng = np.random.default_rng([self.seed, p.re + 2**31, p.im + 2**31])
        return float(rng.uniform(-2.0, 2.0))

    def at_prime_power(self, p: GaussianInt, k: int) -> float:
        lp = self.at_prime(p)
        prev, cur = 1.0, lp
        if k == 0:
            return 1.0
        for _ in range(k - 1):
            prev, cur = cur, lp * cur - prev
        return cur

    def __call__(self, n) -> float:
        n = as_gaussian(n)
        _check_coprime(n, self.level)
        _, fac = factor(n)
        out = 1.0
        for p, e in fac.items():
            out *= self.at_prime_power(p, e)
        return out


@dataclass(frozen=True)
class TableOracle:
    """Values read from lines 'n_string value'; keys are taken up to units."""

    values: dict
    level: Level = field(default_factory=lambda: Level.of(1))

    @classmethod
    def from_file(cls, path, level=1) -> TableOracle:
        vals = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'n value', got {line!r}")
            vals[parse_gaussian(parts[0]).canonical()] = float(parts[1])
        return cls(vals, Level.of(level))

    def __call__(self, n) -> float:
        n = as_gaussian(n)
        _check_coprime(n, self.level)
        key = n.canonical()
        if key not in self.values:
            raise KeyError(f"no eigenvalue tabulated for {key}")
        return self.values[key]


def check_multiplicativity(oracle, m, n, N=None) -> float:
    """|lambda(m) lambda(n) - sum over ideals (d) | (m, n), (d, N) = 1 of lambda(mn/d^2)|."""
    m, n = as_gaussian(m), as_gaussian(n)
    level = Level.of(N) if N is not None else oracle.level
    _check_coprime(m * n, level)
    lhs = oracle(m) * oracle(n)
    rhs = 0.0
    for d in ideal_divisors(ggcd(m, n)):
        if _coprime(d, level.n):
            rhs += oracle((m * n).exact_div(d * d))
    return float(abs(lhs - rhs))


def sgn(x: float) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class Amplifier:
    """Signs x(l), x(l^2) over P(L) and the weights of the expanded square.

    y1 and y2 are keyed by ordered prime pairs (l1, l2) and attach to
    lambda(l1 l2) and lambda(l1^2 l2^2).
    """

    L: float
    primes: tuple[GaussianInt, ...]
    x1: dict
    x2: dict
    y0: dict
    y1: dict
    y2: dict

    @property
    def degenerate(self) -> bool:
        return not self.primes

    def max_weight(self) -> float:
        ws = [*self.y0.values(), *self.y1.values(), *self.y2.values()]
        return max((abs(w) for w in ws), default=0.0)

    def hecke_combination(self) -> dict[GaussianInt, float]:
        """Coefficients c_n with A = sum_n c_n lambda(n), n canonical."""
        out: dict[GaussianInt, float] = {}

        def add(n: GaussianInt, w: float):
            n = n.canonical()
            out[n] = out.get(n, 0.0) + w

        for l, w in self.y0.items():
            add(ONE, w)
        for (l1, l2), w in self.y1.items():
            add(l1 * l2, w)
        for (l1, l2), w in self.y2.items():
            add(l1 * l1 * l2 * l2, w)
        return out

    def squared_form(self, oracle) -> float:
        s1 = sum(self.x1[l] * oracle(l) for l in self.primes)
        s2 = sum(self.x2[l] * oracle(l * l) for l in self.primes)
        return float(np.real(s1 * s1 + s2 * s2))

    def expanded_form(self, oracle) -> float:
        return float(np.real(sum(w * oracle(n) for n, w in self.hecke_combination().items())))


def build_amplifier(oracle, L: float, N=None) -> Amplifier:
    """Squares-only amplifier with x(l) = sgn(lambda(l)) over P(L)."""
    if L < 2:
        raise ValueError("L must be at least 2")
    level = Level.of(N) if N is not None else oracle.level
    primes = tuple(prime_set(L, level))
    x1 = {l: sgn(float(np.real(oracle(l)))) for l in primes}
    x2 = {l: sgn(float(np.real(oracle(l * l)))) for l in primes}
    y0 = {l: float(x1[l] ** 2 + x2[l] ** 2) for l in primes}
    y1 = {}
    y2 = {}
    for l1 in primes:
        for l2 in primes:
            y1[(l1, l2)] = float(x1[l1] * x1[l2] + (x2[l1] * x2[l2] if l1 == l2 else 0))
            y2[(l1, l2)] = float(x2[l1] * x2[l2])
    return Amplifier(L, primes, x1, x2, y0, y1, y2)


@dataclass(frozen=True)
class AmplifierLower:
    value: float
    half_square: float
    pointwise: float
    pointwise_min: float
    holds: bool


def amplifier_lower(oracle, amp: Amplifier) -> AmplifierLower:
    """A = (sum |lambda(l)|)^2 + (sum |lambda(l^2)|)^2 and the two lower bounds below it."""
    a1 = [abs(oracle(l)) for l in amp.primes]
    a2 = [abs(oracle(l * l)) for l in amp.primes]
    value = sum(a1) ** 2 + sum(a2) ** 2
    half = 0.5 * (sum(a1) + sum(a2)) ** 2
    floor = min((x + y for x, y in zip(a1, a2)), default=0.0)
    pointwise = len(amp.primes) / 2 * floor**2
    eps = 1e-12 * max(1.0, value)
    return AmplifierLower(value, half, pointwise, floor, value + eps >= half and half + eps >= pointwise)
