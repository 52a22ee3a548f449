"""Exact enumeration of gamma in R(l) with u(gamma P, P) <= delta, and the
counting functions M, M0, M1, M2, M3 built from it.

Every candidate is decided by an integer inequality. With P scaled by a
power of two D so that Z = zD and R = rD are integral,

    u + 1 = S / (2 |l| D^2 R^2),
    S = (|aD - cZ|^2 + |c|^2 R^2 + |cZ + dD|^2) R^2 + |bD^2 + (a - d)ZD - cZ^2|^2,

so u <= p/q iff q^2 S^2 <= 4 |l|^2 D^4 R^4 (p + q)^2.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .congruence import IntMatrix2
from .gaussian import (
    ONE,
    ZERO,
    GaussianInt,
    Level,
    as_gaussian,
    divisors,
    ggcd,
    gcd_inverse_raw,
    iter_disk,
    prime_set,
)
from .h3geom import H3Point, principal_sqrt

__all__ = [
    "CountParams",
    "MatchClass",
    "MatchedMatrix",
    "CountReport",
    "GridReport",
    "det_set",
    "window",
    "ExactPoint",
    "u_exact_parts",
    "u_value",
    "enumerate_matches",
    "enumerate_matches_boxscan",
    "classify",
    "count_M",
    "count_grid",
    "estimate_work",
    "diophantine_audit",
    "AuditFailure",
    "AuditReport",
    "audit_slacks",
    "envelope_report",
    "ThresholdViolation",
    "geometric_side",
    "GeometricSide",
    "DEFAULT_BUDGET",
]

# estimated (c, d) pairs per determinant beyond which a run is skipped
DEFAULT_BUDGET = 200_000
# relative slack on float windows; the exact test makes the final call
_SLACK = 1e-9


@dataclass(frozen=True)
class CountParams:
    P: H3Point
    N: Level
    L: float
    calL: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "N", Level.of(self.N))
        if not self.N.squarefree:
            raise ValueError(f"level {self.N} is not squarefree")
        if not self.L >= 2:
            raise ValueError("L must be at least 2")
        if not self.calL >= 1:
            raise ValueError("calL must be at least 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


class MatchClass(str, enum.Enum):
    C_ZERO = "c_zero"
    PARABOLIC = "parabolic"
    GENERIC = "generic"


@dataclass(frozen=True)
class MatchedMatrix:
    gamma: IntMatrix2
    l: GaussianInt
    u: float
    cls: MatchClass
    # u + 1 = S / sqrt(K), kept for exact re-filtering at other deltas
    S: int = field(repr=False, compare=False)
    K: int = field(repr=False, compare=False)

    def within(self, delta) -> bool:
        return _u_le(self.S, self.K, delta)

    def sort_key(self):
        return (self.l.norm(), self.l.re, self.l.im, self.gamma.key())


def _u_le(S: int, K: int, delta) -> bool:
    dq = Fraction(delta)
    p, q = dq.numerator, dq.denominator
    return q * q * S * S <= K * (p + q) * (p + q)


def classify(gamma) -> MatchClass:
    """c = 0, parabolic ((a - d)^2 + 4bc = 0 with c != 0), or generic."""
    g = IntMatrix2.of(gamma)
    if not g.c:
        return MatchClass.C_ZERO
    er, ei = g.a.re - g.d.re, g.a.im - g.d.im
    bcr = g.b.re * g.c.re - g.b.im * g.c.im
    bci = g.b.re * g.c.im + g.b.im * g.c.re
    if er * er - ei * ei + 4 * bcr == 0 and 2 * er * ei + 4 * bci == 0:
        return MatchClass.PARABOLIC
    return MatchClass.GENERIC


# ---------------------------------------------------------------------------
# determinant sets and windows


def det_set(L: float, calL: float, N=1) -> list[GaussianInt]:
    """l = 1, l1 l2 or l1^2 l2^2 with l1, l2 in P(L) and calL <= |l|^2 <= 16 calL."""
    primes = prime_set(L, Level.of(N))
    cands = {ONE}
    for l1 in primes:
        for l2 in primes:
            cands.add(l1 * l2)
            cands.add(l1 * l1 * l2 * l2)
    lo, hi = Fraction(calL), 16 * Fraction(calL)
    out = [l for l in cands if lo <= l.norm() <= hi]
    return sorted(out, key=lambda l: (l.norm(), l.re, l.im))


def window(delta: float) -> tuple[float, float]:
    """(x_-, x_+): the solutions of (x - 1/x)^2 / 2 = delta."""
    xp = (math.sqrt(2 * delta) + math.sqrt(2 * delta + 4)) / 2
    return 1 / xp, xp


@dataclass(frozen=True)
class ExactPoint:
    """P scaled by a power of two: z = Z / D, r = R / D with Z, R integral."""

    D: int
    Z: GaussianInt
    R: int

    @classmethod
    def of(cls, P: H3Point) -> ExactPoint:
        x, y, r = P.exact()
        D = math.lcm(x.denominator, y.denominator, r.denominator)
        return cls(D, GaussianInt(int(x * D), int(y * D)), int(r * D))


def u_exact_parts(E: ExactPoint, a, b, c, d, l) -> tuple[int, int]:
    """(S, K) with u + 1 = S / sqrt(K)."""
    D, R = E.D, E.R
    Zr, Zi = E.Z.re, E.Z.im
    a, b, c, d, l = (as_gaussian(v) for v in (a, b, c, d, l))
    czr, czi = c.re * Zr - c.im * Zi, c.re * Zi + c.im * Zr
    A1 = (a.re * D - czr) ** 2 + (a.im * D - czi) ** 2
    B1 = (czr + d.re * D) ** 2 + (czi + d.im * D) ** 2
    # W = b D^2 + (a - d) Z D - c Z^2
    er, ei = a.re - d.re, a.im - d.im
    wr = b.re * D * D + (er * Zr - ei * Zi) * D - (czr * Zr - czi * Zi)
    wi = b.im * D * D + (er * Zi + ei * Zr) * D - (czr * Zi + czi * Zr)
    R2 = R * R
    S = (A1 + (c.re * c.re + c.im * c.im) * R2 + B1) * R2 + wr * wr + wi * wi
    K = 4 * (l.re * l.re + l.im * l.im) * D**4 * R2 * R2
    return S, K


def u_value(S: int, K: int) -> float:
    try:
        return S / math.sqrt(K) - 1.0
    except OverflowError:
        return float(Fraction(S * S, K)) ** 0.5 - 1.0


# ---------------------------------------------------------------------------
# lattice-guided enumeration


def _coprime(a: GaussianInt, N: GaussianInt) -> bool:
    if not a:
        return N.is_unit()
    return ggcd(a, N).is_unit()


def _disk_points(center: complex, r2lo: float, r2hi: float) -> np.ndarray:
    """Integer points w with r2lo <= |w - center|^2 <= r2hi, as an (n, 2) array."""
    if r2hi < 0:
        return np.zeros((0, 2), dtype=np.int64)
    rad = math.sqrt(r2hi)
    xs = np.arange(math.ceil(center.real - rad), math.floor(center.real + rad) + 1)
    ys = np.arange(math.ceil(center.imag - rad), math.floor(center.imag + rad) + 1)
    if not len(xs) or not len(ys):
        return np.zeros((0, 2), dtype=np.int64)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    d2 = (X - center.real) ** 2 + (Y - center.imag) ** 2
    keep = (d2 <= r2hi) & (d2 >= r2lo)
    return np.stack([X[keep], Y[keep]], axis=1)


class _Acceptor:
    """Final exact test and bookkeeping shared by both enumerators."""

    def __init__(self, E: ExactPoint, N: GaussianInt, l: GaussianInt, delta):
        self.E, self.N, self.l = E, N, l
        self.trivial_level = N.is_unit()
        dq = Fraction(delta)
        self.p, self.q = dq.numerator, dq.denominator
        self.out: list[MatchedMatrix] = []

    def __call__(self, a: GaussianInt, b: GaussianInt, c: GaussianInt, d: GaussianInt):
        if not self.trivial_level and not _coprime(a, self.N):
            return
        S, K = u_exact_parts(self.E, a, b, c, d, self.l)
        p, q = self.p, self.q
        if q * q * S * S <= K * (p + q) * (p + q):
            g = IntMatrix2(a, b, c, d)
            self.out.append(MatchedMatrix(g, self.l, u_value(S, K), classify(g), S, K))

    def result(self) -> list[MatchedMatrix]:
        self.out.sort(key=MatchedMatrix.sort_key)
        return self.out


def enumerate_matches(P: H3Point, N, l, delta: float) -> list[MatchedMatrix]:
    """All gamma in R(l) (N | c, (a, N) = 1, det = l) with u(gamma P, P) <= delta."""
    N = Level.of(N)
    if not N.squarefree:
        raise ValueError(f"level {N} is not squarefree")
    l = as_gaussian(l)
    if not l:
        raise ValueError("l must be nonzero")
    if not delta > 0:
        raise ValueError("delta must be positive")
    E = ExactPoint.of(P)
    z, r = P.z, P.r
    absl = abs(l)
    xm, xp = window(delta)
    R2hi = xp * xp * absl * (1 + _SLACK) + _SLACK
    R2lo = xm * xm * absl * (1 - _SLACK) - _SLACK
    rho = math.sqrt(2 * delta * absl) * (1 + _SLACK) + _SLACK
    s = principal_sqrt(complex(l))
    accept = _Acceptor(E, N.n, l, delta)

    # c = 0: a d = l, b in the disk |b + (a - d) z| <= r sqrt(2 delta |l|)
    for a in divisors(l):
        d = l.exact_div(a)
        if not _coprime(a, N.n):
            continue
        center = -complex(a - d) * z
        for b in iter_disk(center, r * rho):
            accept(a, b, ZERO, d)

    # c != 0: c in N Z[i], |c| r <= |cP + d| <= x_+ |l|^{1/2}
    Nc = complex(N.n)
    cmax = math.sqrt(R2hi) / r
    lr, li = l.re, l.im
    two_l = 2 * absl
    utol = delta + 1e-9 * (1 + delta)
    for k in iter_disk(0j, cmax / abs(Nc)):
        if not k:
            continue
        c = N.n * k
        cr, ci = c.re, c.im
        cc = complex(c)
        nc = cr * cr + ci * ci
        c2r2 = nc * r * r
        if c2r2 > R2hi:
            continue
        dpts = _disk_points(-cc * z, R2lo - c2r2, R2hi - c2r2)
        if not len(dpts):
            continue
        h = ggcd(c, l)
        czs = cc * z
        czz = czs * z
        rc = 2 * (czs / s).real
        for dr, di in dpts.tolist():
            if h.is_unit():
                cgr, cgi, dgr, dgi, lgr, lgi = cr, ci, dr, di, lr, li
            else:
                g = ggcd(GaussianInt(dr, di), h) if (dr or di) else h
                cg_, dg_, lg_ = c.exact_div(g), GaussianInt(dr, di).exact_div(g), l.exact_div(g)
                cgr, cgi, dgr, dgi, lgr, lgi = cg_.re, cg_.im, dg_.re, dg_.im, lg_.re, lg_.im
            # x dg = e (mod cg); e must be a unit, else gcd(c, d) does not divide l
            er, ei, xr, xi = gcd_inverse_raw(dgr, dgi, cgr, cgi)
            if er * er + ei * ei != 1:
                continue
            # inverse of dg is x / e = x conj(e)
            ir, ii = xr * er + xi * ei, xi * er - xr * ei
            a0r, a0i = lgr * ir - lgi * ii, lgr * ii + lgi * ir
            ncg = cgr * cgr + cgi * cgi
            # reduce a0 mod cg
            pr = a0r * cgr + a0i * cgi
            pi = a0i * cgr - a0r * cgi
            qr = (2 * pr + ncg) // (2 * ncg)
            qi = (2 * pi + ncg) // (2 * ncg)
            a0r, a0i = a0r - (qr * cgr - qi * cgi), a0i - (qr * cgi + qi * cgr)
            # a lies within sqrt(2 delta |l|) of s (conj(d / s) + 2 Re(c z / s))
            dc = complex(dr, di)
            center = s * ((dc / s).conjugate() + rc)
            cgc = complex(cgr, cgi)
            tc = (center - complex(a0r, a0i)) / cgc
            trad = rho / math.sqrt(ncg)
            t2 = trad * trad * (1 + 1e-12) + 1e-12
            for tr in range(math.ceil(tc.real - trad - 1e-9), math.floor(tc.real + trad + 1e-9) + 1):
                rem = t2 - (tr - tc.real) ** 2
                if rem < 0:
                    continue
                hh = math.sqrt(rem)
                for ti in range(math.ceil(tc.imag - hh), math.floor(tc.imag + hh) + 1):
                    ar = a0r + cgr * tr - cgi * ti
                    ai = a0i + cgr * ti + cgi * tr
                    ac = complex(ar, ai)
                    n2 = abs(ac - czs) ** 2 + c2r2
                    if n2 > R2hi or n2 < R2lo:
                        continue
                    # b = (a d - l) / c, exact by the congruence
                    nr = ar * dr - ai * di - lr
                    ni = ar * di + ai * dr - li
                    xr_ = nr * cr + ni * ci
                    xi_ = ni * cr - nr * ci
                    if xr_ % nc or xi_ % nc:
                        raise ArithmeticError(f"congruence failed for c={c}, d={dr}+{di}i")
                    br, bi = xr_ // nc, xi_ // nc
                    w = complex(br, bi) + (ac - dc) * z - czz
                    uf = (n2 + abs(czs + dc) ** 2 + abs(w) ** 2 / (r * r)) / two_l - 1
                    if uf > utol:
                        continue
                    accept(GaussianInt(ar, ai), GaussianInt(br, bi), c, GaussianInt(dr, di))
    return accept.result()


def estimate_work(P: H3Point, N, l, delta: float) -> float:
    """Rough number of candidate matrices visited by enumerate_matches.

    Counts the b-disks of the c = 0 branch and, for c != 0, one a-disk per
    (c, d) pair; sum 1/|c|^2 over the c-disk is bounded by 4 + 2 pi log.
    """
    N = Level.of(N)
    l = as_gaussian(l)
    absl = abs(l)
    xm, xp = window(delta)
    rho2 = 2 * delta * absl
    work = len(divisors(l)) * (1 + math.pi * P.r * P.r * rho2)
    R = xp * math.sqrt(absl)
    kmax = R / (P.r * N.absval)
    n_c = math.pi * (kmax + 1) ** 2
    n_d = math.pi * (xp * xp - xm * xm) * absl + 4 * R + 1
    inv_c2 = (4 + 2 * math.pi * math.log(max(1.0, kmax))) / N.n.norm()
    return work + n_d * (n_c + math.pi * rho2 * inv_c2)


# ---------------------------------------------------------------------------
# independent box-scan oracle


def enumerate_matches_boxscan(P: H3Point, N, l, delta: float) -> list[MatchedMatrix]:
    """Same set as enumerate_matches by a plain scan over boxes for c, d, a.

    Uses only that each of |c| r, |cz + d|, |a - cz| is at most
    sqrt(2 |l| (1 + delta)), which follows from the expression for u + 1.
    """
    N = Level.of(N)
    l = as_gaussian(l)
    E = ExactPoint.of(P)
    z, r = P.z, P.r
    absl = abs(l)
    B2 = 2 * absl * (1 + delta) * (1 + _SLACK) + _SLACK
    B = math.sqrt(B2)
    accept = _Acceptor(E, N.n, l, delta)
    lre, lim = l.re, l.im
    cbox = int(math.floor(B / r)) + 1
    for cr in range(-cbox, cbox + 1):
        for ci in range(-cbox, cbox + 1):
            c = GaussianInt(cr, ci)
            if not N.n.divides(c):
                continue
            cc = complex(c)
            if abs(cc) * r > B:
                continue
            if not c:
                for a in divisors(l):
                    d = l.exact_div(a)
                    bc = -complex(a - d) * z
                    rb = r * B
                    for br in range(math.ceil(bc.real - rb), math.floor(bc.real + rb) + 1):
                        for bi in range(math.ceil(bc.imag - rb), math.floor(bc.imag + rb) + 1):
                            b = GaussianInt(br, bi)
                            if _float_u(P, a, b, c, d, absl) <= delta + 1e-9 * (1 + delta):
                                accept(a, b, c, d)
                continue
            dpts = _box_points(-cc * z, B)
            apts = _box_points(cc * z, B)
            if not len(dpts) or not len(apts):
                continue
            ar, ai = apts[:, 0][:, None], apts[:, 1][:, None]
            dr, di = dpts[:, 0][None, :], dpts[:, 1][None, :]
            # b c = a d - l must be divisible by c
            nr = ar * dr - ai * di - lre
            ni = ar * di + ai * dr - lim
            cn = cr * cr + ci * ci
            xr = nr * cr + ni * ci
            xi = ni * cr - nr * ci
            ok = (xr % cn == 0) & (xi % cn == 0)
            brr, bii = xr // cn, xi // cn
            # float value of u, vectorized; the exact test decides
            A = ar + 1j * ai
            Dd = dr + 1j * di
            Bb = brr + 1j * bii
            uf = (
                np.abs(A - cc * z) ** 2
                + abs(cc) ** 2 * r * r
                + np.abs(cc * z + Dd) ** 2
                + np.abs(Bb + (A - Dd) * z - cc * z * z) ** 2 / (r * r)
            ) / (2 * absl) - 1
            ia, id_ = np.nonzero(ok & (uf <= delta + 1e-9 * (1 + delta)))
            for p, q in zip(ia.tolist(), id_.tolist()):
                a = GaussianInt(int(apts[p, 0]), int(apts[p, 1]))
                d = GaussianInt(int(dpts[q, 0]), int(dpts[q, 1]))
                b = GaussianInt(int(brr[p, q]), int(bii[p, q]))
                accept(a, b, c, d)
    return accept.result()


def _box_points(center: complex, B: float) -> np.ndarray:
    xs = np.arange(math.ceil(center.real - B), math.floor(center.real + B) + 1)
    ys = np.arange(math.ceil(center.imag - B), math.floor(center.imag + B) + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1).astype(np.int64)


def _float_u(P, a, b, c, d, absl) -> float:
    z, r = P.z, P.r
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    t = abs(a - c * z) ** 2 + abs(c) ** 2 * r * r + abs(c * z + d) ** 2 + abs(b + (a - d) * z - c * z * z) ** 2 / (r * r)
    return t / (2 * absl) - 1


# ---------------------------------------------------------------------------
# reports


@dataclass
class CountReport:
    params: CountParams
    M: int
    M0: int
    M1: int
    M2: int
    M3: int
    matches: list[MatchedMatrix]
    dets: list[GaussianInt]
    envelopes: dict = field(default_factory=dict)

    @classmethod
    def from_matches(cls, params: CountParams, dets, matches) -> CountReport:
        M0 = sum(m.cls is MatchClass.C_ZERO for m in matches)
        M2 = sum(m.cls is MatchClass.PARABOLIC for m in matches)
        M = len(matches)
        rep = cls(params, M, M0, M - M0, M2, M - M0 - M2, list(matches), list(dets))
        return rep


@dataclass
class GridReport:
    P: H3Point
    N: Level
    L: float
    calL: float
    dets: list[GaussianInt]
    reports: dict  # delta -> CountReport, for deltas within budget
    skipped: list  # deltas over budget
    delta_run: float | None


def _worker(args):
    P, N, l, delta = args
    return enumerate_matches(P, N, l, delta)


def _run_all(P, N, dets, delta, jobs: int, cache: dict | None = None) -> list[MatchedMatrix]:
    """Matches over all l, merged in (l, gamma) order whatever the schedule."""
    cache = {} if cache is None else cache
    keys = {l: (P, N.n, l, float(delta)) for l in dets}
    todo = [l for l in dets if keys[l] not in cache]
    tasks = [(P, N, l, delta) for l in todo]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
            parts = list(ex.map(_worker, tasks))
    else:
        parts = [_worker(t) for t in tasks]
    for l, part in zip(todo, parts):
        cache[keys[l]] = part
    allm = [m for l in dets for m in cache[keys[l]]]
    allm.sort(key=MatchedMatrix.sort_key)
    return allm


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("HB3_JOBS", "1")))
    except ValueError:
        return 1


def count_M(params: CountParams, jobs: int | None = None, envelopes: bool = True) -> CountReport:
    """M(P, L, calL, delta) and its parts, summed over det_set(L, calL)."""
    jobs = default_jobs() if jobs is None else jobs
    dets = det_set(params.L, params.calL, params.N)
    matches = _run_all(params.P, params.N, dets, params.delta, jobs)
    rep = CountReport.from_matches(params, dets, matches)
    if envelopes:
        rep.envelopes = envelope_report(rep)
    return rep


def count_grid(
    P: H3Point,
    N,
    L: float,
    calL: float,
    deltas,
    budget: float | None = DEFAULT_BUDGET,
    jobs: int | None = None,
    envelopes: bool = True,
    cache: dict | None = None,
) -> GridReport:
    """Counts for every delta of a grid from a single enumeration.

    The match sets are nested in delta, so enumerating once at the largest
    affordable delta and filtering exactly gives all smaller ones. Deltas
    whose estimated work exceeds the budget for some determinant are skipped.
    A cache dict shared between calls reuses enumerations per (P, N, l, delta).
    """
    N = Level.of(N)
    jobs = default_jobs() if jobs is None else jobs
    dets = det_set(L, calL, N)
    deltas = sorted(set(float(d) for d in deltas))
    feasible = [
        dl for dl in deltas if budget is None or all(estimate_work(P, N, l, dl) <= budget for l in dets)
    ]
    skipped = [dl for dl in deltas if dl not in feasible]
    reports: dict = {}
    if not feasible:
        return GridReport(P, N, L, calL, dets, reports, skipped, None)
    dmax = max(feasible)
    matches = _run_all(P, N, dets, dmax, jobs, cache)
    for dl in feasible:
        sub = [m for m in matches if m.within(dl)]
        rep = CountReport.from_matches(CountParams(P, N, L, calL, dl), dets, sub)
        if envelopes:
            rep.envelopes = envelope_report(rep)
        reports[dl] = rep
    return GridReport(P, N, L, calL, dets, reports, skipped, dmax)


# ---------------------------------------------------------------------------
# audit of the derived inequalities


class AuditFailure(AssertionError):
    def __init__(self, name: str, match: MatchedMatrix, value: float, bound: float):
        self.name, self.match, self.value, self.bound = name, match, value, bound
        super().__init__(f"inequality {name} violated by {match.gamma} (det {match.l}): slack {value!r} > {bound!r}")


@dataclass
class AuditReport:
    checked: int
    max_slack: dict  # inequality name -> max value / bound

    @property
    def passed(self) -> bool:
        return all(v <= 1 for v in self.max_slack.values())


def audit_slacks(P: H3Point, matches, delta: float) -> dict:
    """Normalized slacks value / bound per inequality, one array entry per match."""
    if not matches:
        return {}
    z, r = P.z, P.r
    ent = np.array([[complex(e) for e in m.gamma.entries()] for m in matches])
    a, b, c, d = ent[:, 0], ent[:, 1], ent[:, 2], ent[:, 3]
    l = np.array([complex(m.l) for m in matches])
    absl = np.abs(l)
    # principal square root, 0 <= arg < pi
    s = np.sqrt(absl) * np.exp(0.5j * np.mod(np.angle(l), 2 * np.pi))
    _, xp = window(delta)
    root = np.sqrt(absl)
    sq = math.sqrt(2 * delta)
    tol = 1e-9
    out = {}

    def put(name, value, bound):
        out[name] = value / bound

    nrow = np.sqrt(np.abs(c * z + d) ** 2 + np.abs(c * r) ** 2)
    ncol = np.sqrt(np.abs(c * z - a) ** 2 + np.abs(c * r) ** 2)
    for name, n in (("height_window", nrow), ("inverse_window", ncol)):
        x = root / n
        put(name, 0.5 * (x - 1 / x) ** 2, delta * (1 + tol) + tol)
    put("rc", np.abs(c) * r, xp * root * (1 + tol) + tol)
    put("a_plus_d", np.abs(a + d), 2 * xp * root * (1 + tol) + tol)
    put("twocz_minus_a_plus_d", np.abs(2 * c * z - a + d), 2 * xp * root * (1 + tol) + tol)
    put("re_twocz_a_d", np.abs(((2 * c * z - a + d) / s).real), sq * (1 + tol) + tol)
    put("im_a_plus_d", np.abs(((a + d) / s).imag), sq * (1 + tol) + tol)
    lhs = np.abs(r * r * np.conj(c) * l / absl - c * z * z + (a - d) * z + b)
    put("complex_part", lhs, r * root * sq * (1 + tol) + tol)
    lhs2 = np.abs(-c * z * z + (a - d) * z + b)
    put("translation_part", lhs2, r * root * (sq + xp) * (1 + tol) + tol)
    return out


def diophantine_audit(report: CountReport, strict: bool = True) -> AuditReport:
    """Check every match against the exact inequalities implied by u <= delta."""
    P, delta = report.params.P, report.params.delta
    worst: dict = {}
    for name, v in audit_slacks(P, report.matches, delta).items():
        i = int(np.argmax(v))
        if strict and v[i] > 1:
            raise AuditFailure(name, report.matches[i], float(v[i]), 1.0)
        worst[name] = float(v[i])
    return AuditReport(len(report.matches), worst)


# ---------------------------------------------------------------------------
# envelopes


class ThresholdViolation(AssertionError):
    pass


def parabolic_threshold_ok(report: CountReport) -> bool:
    """M2 > 0 forces delta >= 1 / (8 calL^{1/2} r^2); checked in exact arithmetic."""
    if report.M2 == 0:
        return True
    p = report.params
    dl, cl, r = Fraction(p.delta), Fraction(p.calL), Fraction(p.P.r)
    return 64 * cl * dl * dl * r**4 >= 1


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= 1e-9 * max(1.0, abs(y))


def envelope_report(report: CountReport) -> dict:
    """Named envelopes at implied constant 1 as {name: (count, envelope, ratio)}.

    Raises ThresholdViolation if a parabolic match occurs below the exact
    threshold, or if the decomposition identities fail.
    """
    p = report.params
    L, cl, dl, r = p.L, p.calL, p.delta, p.P.r
    absN = p.N.absval
    if report.M != report.M0 + report.M1 or report.M1 != report.M2 + report.M3:
        raise ThresholdViolation("decomposition M = M0 + M1, M1 = M2 + M3 failed")
    if not parabolic_threshold_ok(report):
        witness = next(m for m in report.matches if m.cls is MatchClass.PARABOLIC)
        raise ThresholdViolation(
            f"parabolic match {witness.gamma} (det {witness.l}) at delta {dl} below 1/(8 calL^(1/2) r^2)"
        )
    out: dict = {}

    def put(name, count, env):
        out[name] = (count, env, count / env if env > 0 else math.inf)

    put("first_bound", report.M, cl**2 * (1 + dl) ** 4 + cl**1.5 * r * r * dl)
    if _close(cl, 1.0):
        m0 = 1 + r * r * dl
    elif _close(cl, L**2):
        m0 = L**2 * (1 + L * r * r * dl)
    elif _close(cl, L**4):
        m0 = L**2 * (1 + L**2 * r * r * dl)
    else:
        m0 = sum(1 + abs(l) * r * r * dl for l in report.dets) or 1.0
    put("c_zero", report.M0, m0)
    put("parabolic", report.M2, cl * (1 + math.sqrt(cl * dl)))
    if _close(cl, L**2):
        put("large_volume_L2", report.M1, L**2 + L**4 / absN**2)
        put("small_distance_L2", report.M1, L**2.5 if dl <= 1 / L else L**4 * dl**1.5)
        if dl <= L**-4:
            e = L**2
        elif dl <= L**-3:
            e = L**4 * math.sqrt(dl)
        elif dl <= 1 / L:
            e = L**2.5
        else:
            e = L**4 * dl**1.5
        put("tiny_distance_L2", report.M1, e)
    if _close(cl, L**4):
        put("large_volume_L4_nonparabolic", report.M3, L**2 + L**6 / absN**2)
        put("large_volume_L4", report.M1, L**6)
        put("small_distance_L4", report.M1, L**4 if dl <= L**-4 else L**6 * math.sqrt(dl))
        put("tiny_distance_L4", report.M1, L**3 if dl <= L**-6 else L**6 * math.sqrt(dl))
    return out


# ---------------------------------------------------------------------------
# geometric side of the amplified inequality


@dataclass
class GeometricSide:
    value: float  # dyadic sup of the bracket
    argmax_delta: float | None
    central_sum: float  # sum over dyadic delta including M(P, L, 1, delta) / L
    terms: list  # (delta, bracket value, central-sum term)
    infeasible: list  # deltas skipped for budget

    @property
    def complete(self) -> bool:
        return not self.infeasible


def dyadic_grid(T: float, delta_max: float = 1.0) -> list[float]:
    """Powers of two in (T^-2, delta_max]."""
    out = []
    k = math.floor(math.log2(delta_max))
    while 2.0**k > T**-2:
        out.append(2.0**k)
        k -= 1
    return sorted(out)


def geometric_side(
    P: H3Point,
    N,
    T: float,
    L: float,
    A: float,
    delta_max: float = 1.0,
    budget: float | None = DEFAULT_BUDGET,
    jobs: int | None = None,
) -> GeometricSide:
    """sup over dyadic delta of min(T^2, T / sqrt(delta)) (r^2 delta + 1/L + M1(L^2)/L^3 + M1(L^4)/L^4).

    Measured counts are used; a shape diagnostic, since the constants hidden
    in the spectral side are not explicit.
    """
    grid = dyadic_grid(T, delta_max)
    cache: dict = {}
    g1 = count_grid(P, N, L, 1.0, grid, budget, jobs, envelopes=False, cache=cache)
    g2 = count_grid(P, N, L, L**2, grid, budget, jobs, envelopes=False, cache=cache)
    g4 = count_grid(P, N, L, L**4, grid, budget, jobs, envelopes=False, cache=cache)
    r = P.r
    best, arg, central, terms, infeasible = -math.inf, None, 0.0, [], []
    for dl in grid:
        if dl not in g1.reports or dl not in g2.reports or dl not in g4.reports:
            infeasible.append(dl)
            continue
        m1_2, m1_4 = g2.reports[dl].M1, g4.reports[dl].M1
        bracket = min(T * T, T / math.sqrt(dl)) * (r * r * dl + 1 / L + m1_2 / L**3 + m1_4 / L**4)
        weight = min(T * T, T / (math.sqrt(dl) * (1 + dl) ** A))
        cterm = weight * (g1.reports[dl].M / L + g2.reports[dl].M / L**3 + g4.reports[dl].M / L**4)
        central += cterm
        terms.append((dl, bracket, cterm))
        if bracket > best:
            best, arg = bracket, dl
    return GeometricSide(best if arg is not None else math.nan, arg, central, terms, infeasible)
