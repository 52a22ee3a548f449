"""Verification suites shared by the CLI and the acceptance tests.

Each suite returns a SuiteResult holding metrics and a list of failures.
Sizes are parameters so that the same code runs quick desk checks and the
full acceptance sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .congruence import reduce
from .counting import (
    DEFAULT_BUDGET,
    AuditFailure,
    MatchClass,
    ThresholdViolation,
    count_grid,
    diophantine_audit,
    enumerate_matches_boxscan,
    envelope_report,
)
from .fourier import bessel_k, circle_count
from .gaussian import GaussianInt, Level, ggcd, gsqrt, is_gaussian_prime, is_squarefree
from .gon import (
    Lattice4,
    count_ball,
    count_ball_boxscan,
    exact_norm2,
    lattice_of,
    lemma1_bound,
    successive_minima,
)
from .h3geom import H3Point
from .heckeamp import (
    EisensteinOracle,
    SyntheticHeckeOracle,
    check_multiplicativity,
    coset_reps,
    raw_coset_reps,
)
from .spectral import SpectralParams, verify_pair

__all__ = [
    "SuiteResult",
    "squarefree_levels",
    "random_reduced_points",
    "suite_gon",
    "suite_lemma1",
    "suite_hecke",
    "suite_spectral",
    "suite_counting",
    "suite_circle",
    "C4",
    "COUNTING_LEVELS",
]

# the one global constant for count_ball <= C4 * lemma1_bound
C4 = 2048.0
COUNTING_LEVELS = (1, 1 + 1j, 3, 2 + 1j, 3 + 2j)


@dataclass
class SuiteResult:
    name: str
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, msg: str) -> None:
        # a handful of witnesses is enough to debug; keep reports bounded
        if len(self.failures) < 20:
            self.failures.append(msg)
        self.metrics["failure_count"] = self.metrics.get("failure_count", 0) + 1


def squarefree_levels(max_norm: int) -> list[GaussianInt]:
    out = []
    for a in range(1, math.isqrt(max_norm) + 1):
        for b in range(0, math.isqrt(max_norm) + 1):
            n = GaussianInt(a, b)
            if n.norm() <= max_norm and is_squarefree(n) and n.canonical() == n:
                out.append(n)
    return sorted(out, key=lambda n: (n.norm(), n.re, n.im))


def random_reduced_points(N, count: int, rng: np.random.Generator) -> list[H3Point]:
    pts = []
    for _ in range(count):
        P = H3Point(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), math.exp(rng.uniform(math.log(0.05), math.log(3.0))))
        pts.append(reduce(P, N)[0])
    return pts


# ---------------------------------------------------------------------------


def suite_gon(n_points: int = 200, seed: int = 0, max_norm: int = 40) -> SuiteResult:
    """Minima structure of L(P) at reduced points of squarefree levels."""
    res = SuiteResult("gon")
    rng = np.random.default_rng([seed, 1])
    levels = squarefree_levels(max_norm)
    worst_eq, lo, hi = 0.0, math.inf, 0.0
    for k in range(n_points):
        N = levels[k % len(levels)]
        (P,) = random_reduced_points(N, 1, rng)
        prof = successive_minima(lattice_of(P))
        m1, m2, m3, m4 = prof.minima
        eq = max(abs(m1 - m2) / m2, abs(m3 - m4) / m4)
        worst_eq = max(worst_eq, eq)
        if eq > 1e-12:
            res.fail(f"minima pairs differ at {P} (N={N}): {prof.minima}")
        w = prof.product / (P.r * P.r)
        lo, hi = min(lo, w), max(hi, w)
        if not 1 / 16 <= w <= 16:
            res.fail(f"m1m2m3m4/r^2 = {w} outside [1/16, 16] at {P}")
        # m1 >= |N|^{-1/2} exactly: m1^4 |N|^2 >= 1 with the exact m1^2
        n2 = exact_norm2(P, prof.achieving_vectors[0])
        if n2 * n2 * N.norm() < 1:
            res.fail(f"m1 < |N|^(-1/2) at {P} (N={N})")
    res.metrics.update(points=n_points, levels=len(levels), max_pair_gap=worst_eq, window_min=lo, window_max=hi)
    return res


def _random_lattice(rng: np.random.Generator) -> Lattice4:
    if rng.random() < 0.5:
        P = H3Point(rng.uniform(-0.5, 0.5), rng.uniform(0, 0.5), rng.uniform(0.4, 2.5))
        return lattice_of(P)
    while True:
        B = np.eye(4) + 0.4 * rng.standard_normal((4, 4))
        if np.linalg.cond(B) < 8:
            return Lattice4(B * rng.uniform(0.5, 1.5))


def suite_lemma1(trials: int = 1000, seed: int = 0) -> SuiteResult:
    """count_ball against lemma1_bound with one constant, and against the box scan."""
    res = SuiteResult("lemma1")
    rng = np.random.default_rng([seed, 2])
    worst = 0.0
    for _ in range(trials):
        lat = _random_lattice(rng)
        R = rng.uniform(0.0, 5.0)
        center = rng.uniform(-2, 2, size=4)
        n = count_ball(lat, center, R)
        m = count_ball_boxscan(lat, center, R)
        if n != m:
            res.fail(f"count_ball {n} != box scan {m} (R={R})")
        ratio = n / lemma1_bound(successive_minima(lat), R)
        worst = max(worst, ratio)
        if ratio > C4:
            res.fail(f"count {n} exceeds C4 * bound at R={R}")
    res.metrics.update(trials=trials, C4=C4, max_ratio=worst)
    return res


def _split_primes(max_norm: int) -> list[GaussianInt]:
    out = []
    # first-quadrant primes of prime norm: 1+i and both conjugates above p = 1 mod 4
    for a in range(1, math.isqrt(max_norm) + 1):
        for b in range(1, math.isqrt(max_norm) + 1):
            p = GaussianInt(a, b)
            if p.norm() <= max_norm and is_gaussian_prime(p):
                out.append(p)
    return sorted(out, key=lambda p: (p.norm(), p.re))


def _upper_coset_key(a: GaussianInt, b: GaussianInt, d: GaussianInt):
    # diag(e, 1/e) and [[1, k], [0, 1]] on the left fix the coset
    e = a.unit_to_canonical()
    a2, b2, d2 = a * e, b * e, d * e.conj()
    return a2, d2, b2 % d2


def suite_hecke(pairs: int = 500, oracles: int = 1000, max_norm: int = 100, seed: int = 0) -> SuiteResult:
    res = SuiteResult("hecke")
    rng = np.random.default_rng([seed, 3])
    primes = _split_primes(max_norm)
    for l in primes:
        for n, want in ((l, l.norm() + 1), (l * l, l.norm() ** 2 + l.norm() + 1)):
            reps = coset_reps(n)
            raw = raw_coset_reps(n)
            keys = {_upper_coset_key(g.a, g.b, g.d) for g in raw}
            if len(reps) != want or len(keys) != want or len(raw) != 4 * want:
                res.fail(f"coset count for {n}: reps {len(reps)}, raw classes {len(keys)}, expected {want}")
    # Eisenstein multiplicativity over random m, n, s
    levels = [Level.of(N) for N in (1, 1 + 1j, 3, 2 + 1j)]
    worst = 0.0
    done = 0
    while done < pairs:
        lev = levels[done % len(levels)]
        m = GaussianInt(int(rng.integers(-12, 13)), int(rng.integers(-12, 13)))
        n = GaussianInt(int(rng.integers(-12, 13)), int(rng.integers(-12, 13)))
        if not m or not n or not _coprime(m * n, lev.n):
            continue
        s = complex(rng.uniform(-1, 1), rng.uniform(-5, 5)) if rng.random() < 0.5 else complex(0, rng.uniform(-5, 5))
        worst = max(worst, check_multiplicativity(EisensteinOracle(s, lev), m, n))
        done += 1
    if worst > 1e-10:
        res.fail(f"Eisenstein multiplicativity residual {worst}")
    # pointwise amplifier floor over synthetic Hecke-consistent oracles
    floor = math.inf
    ps = _split_primes(200)
    for k in range(oracles):
        orc = SyntheticHeckeOracle(seed * 100_003 + k)
        for l in ps:
            v = abs(orc(l)) + abs(orc(l * l))
            floor = min(floor, v)
    if floor < 0.5:
        res.fail(f"amplifier floor {floor} < 1/2")
    res.metrics.update(split_primes=len(primes), mult_pairs=pairs, mult_residual=worst, oracles=oracles, floor=floor)
    return res


def _coprime(a: GaussianInt, N: GaussianInt) -> bool:
    return ggcd(a, N).is_unit()


def suite_spectral(Ts=(1, 5, 25), As=(3, 6, 10), t_points: int = 401, window_samples: int = 1000, seed: int = 0) -> SuiteResult:
    res = SuiteResult("spectral")
    grid = np.linspace(-20.0, 20.0, t_points)
    for T in Ts:
        for A in As:
            rep = verify_pair(SpectralParams(T, A), grid, window_samples, seed)
            tag = f"T{T}_A{A}"
            res.metrics[f"{tag}_ft_dev"] = rep.ft_max_dev
            res.metrics[f"{tag}_window_min"] = rep.window_min
            res.metrics[f"{tag}_boundk_C"] = rep.boundk_C
            if rep.ft_max_dev > 1e-6 or not rep.converged:
                res.fail(f"{tag}: Fourier deviation {rep.ft_max_dev}")
            if not rep.window_min > 1 / 8:
                res.fail(f"{tag}: h window minimum {rep.window_min} <= 1/8")
            if not (rep.h_min_real > 0 and rep.h_min_imag > 0):
                res.fail(f"{tag}: h not positive")
            if not math.isfinite(rep.boundk_C):
                res.fail(f"{tag}: k envelope constant not finite")
    return res


def suite_circle(X_max: int = 3000) -> SuiteResult:
    res = SuiteResult("circle")
    worst = 0.0
    for X in range(1, X_max + 1):
        e = abs(circle_count(X) - math.pi * X * X) / X ** (2 / 3)
        worst = max(worst, e)
        if e > 10:
            res.fail(f"circle count error at X={X}: {e} X^(2/3)")
    k0 = bessel_k(0, 1.0)
    if abs(k0 - 0.4210244382) > 1e-8:
        res.fail(f"K0(1) = {k0}")
    res.metrics.update(X_max=X_max, max_scaled_error=worst, K0_1=k0)
    return res


def _parabolic_ok(m) -> bool:
    g = m.gamma
    root = gsqrt(m.l)
    if root is None:
        return False
    tr = g.a + g.d
    return tr == root * 2 or tr == -(root * 2)


def suite_counting(
    levels=COUNTING_LEVELS,
    n_random: int = 5,
    Ls=(5, 9, 13),
    deltas=None,
    budget: float | None = DEFAULT_BUDGET,
    oracle_max_norm: int = 700,
    seed: int = 0,
    jobs: int = 1,
) -> SuiteResult:
    """Enumeration against the box-scan oracle, the audit and the exact identities."""
    res = SuiteResult("counting")
    if deltas is None:
        deltas = [2.0**-k for k in range(21)]
    rng = np.random.default_rng([seed, 5])
    combos = matches_total = oracle_checks = skipped = 0
    slack: dict = {}
    ratios: dict = {}
    for N in levels:
        N = Level.of(N)
        points = [H3Point(0.0, 0.0, 1.0), *random_reduced_points(N, n_random, rng)]
        for P in points:
            cache: dict = {}
            oracle_cache: dict = {}
            for L in Ls:
                for cl in (1, L**2, L**4):
                    combos += 1
                    g = count_grid(P, N, L, cl, deltas, budget, jobs, envelopes=False, cache=cache)
                    skipped += len(g.skipped)
                    if g.delta_run is None:
                        continue
                    for l in g.dets:
                        if l.norm() > oracle_max_norm:
                            continue
                        key = (l, g.delta_run)
                        if key not in oracle_cache:
                            oracle_cache[key] = enumerate_matches_boxscan(P, N, l, g.delta_run)
                    for dl, rep in g.reports.items():
                        _check_report(res, rep, slack, ratios)
                        matches_total += rep.M
                        for l in g.dets:
                            key = (l, g.delta_run)
                            if key not in oracle_cache:
                                continue
                            oracle_checks += 1
                            want = [m.gamma for m in oracle_cache[key] if m.within(dl)]
                            got = [m.gamma for m in rep.matches if m.l == l]
                            if want != got:
                                res.fail(f"oracle mismatch P={P} N={N} l={l} delta={dl}: {len(got)} vs {len(want)}")
                    counts = [g.reports[d].M for d in sorted(g.reports)]
                    if counts != sorted(counts):
                        res.fail(f"counts not monotone in delta at P={P} N={N} L={L} calL={cl}")
    res.metrics.update(
        combos=combos, matches=matches_total, oracle_checks=oracle_checks, skipped_deltas=skipped, budget=budget
    )
    for k, v in sorted(slack.items()):
        res.metrics[f"slack_{k}"] = v
    for k, v in sorted(ratios.items()):
        res.metrics[f"ratio_{k}"] = v
    return res


def _check_report(res: SuiteResult, rep, slack: dict, ratios: dict) -> None:
    p = rep.params
    if rep.M != rep.M0 + rep.M1 or rep.M1 != rep.M2 + rep.M3:
        res.fail(f"decomposition fails at {p}")
    if rep.M2 > 0 and 64 * Fraction(p.calL) * Fraction(p.delta) ** 2 * Fraction(p.P.r) ** 4 < 1:
        res.fail(f"parabolic match below threshold at {p}")
    try:
        env = envelope_report(rep)
    except ThresholdViolation as exc:
        res.fail(str(exc))
        env = {}
    for name, (_, _, ratio) in env.items():
        ratios[name] = max(ratios.get(name, 0.0), ratio)
    try:
        audit = diophantine_audit(rep)
    except AuditFailure as exc:
        res.fail(str(exc))
        return
    for name, v in audit.max_slack.items():
        slack[name] = max(slack.get(name, 0.0), v)
    for m in rep.matches:
        if m.cls is MatchClass.PARABOLIC and not _parabolic_ok(m):
            res.fail(f"parabolic {m.gamma} with det {m.l} lacks a + d = +-2 sqrt(l)")

