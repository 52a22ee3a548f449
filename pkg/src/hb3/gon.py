"""Geometry of numbers for rank-4 lattices, in particular L(P) = {cP + d}.

Short vectors are found by Fincke-Pohst enumeration over a Cholesky
factorization of the Gram matrix. For L(P) the norms of candidate vectors
are recomputed exactly from the dyadic coordinates of P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gaussian import GaussianInt, Level
from .h3geom import H3Point

__all__ = [
    "Lattice4",
    "MinimaProfile",
    "lattice_of",
    "enumerate_ball",
    "successive_minima",
    "count_ball",
    "count_ball_boxscan",
    "lemma1_bound",
    "lemma2d_bound",
    "reduce_pair",
    "exact_norm2",
    "BALL_RTOL",
]

# closed-ball membership: d^2 <= R^2 (1 + BALL_RTOL) + BALL_ATOL
BALL_RTOL = 1e-12
BALL_ATOL = 1e-12


def in_ball(d2, R: float):
    return d2 <= R * R * (1 + BALL_RTOL) + BALL_ATOL


@dataclass(frozen=True, eq=False)
class Lattice4:
    basis: np.ndarray
    point: H3Point | None = None
    gram: np.ndarray = field(init=False)
    covolume: float = field(init=False)

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.shape != (4, 4):
            raise ValueError(f"expected a 4x4 basis, got shape {B.shape}")
        G = B @ B.T
        det = float(np.linalg.det(G))
        if not det > 0:
            raise ValueError("basis vectors are linearly dependent")
        B.setflags(write=False)
        G.setflags(write=False)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "covolume", math.sqrt(det))

    def vectors(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs, dtype=float) @ self.basis


@dataclass(frozen=True)
class MinimaProfile:
    m1: float
    m2: float
    m3: float
    m4: float
    achieving_vectors: tuple[tuple[int, ...], ...]

    @property
    def minima(self) -> tuple[float, float, float, float]:
        return (self.m1, self.m2, self.m3, self.m4)

    @property
    def product(self) -> float:
        return self.m1 * self.m2 * self.m3 * self.m4


def lattice_of(P: H3Point) -> Lattice4:
    """Basis rows 1, i, P, iP in coordinates {1, i, j, k}."""
    x, y, r = P.zre, P.zim, P.r
    basis = [[1, 0, 0, 0], [0, 1, 0, 0], [x, y, r, 0], [-y, x, 0, r]]
    return Lattice4(np.array(basis, dtype=float), point=P)


def exact_norm2(P: H3Point, coeffs: Sequence[int]) -> Fraction:
    """|cP + d|^2 exactly, for coefficients (d_re, d_im, c_re, c_im) of L(P)."""
    x, y, r = P.exact()
    dr, di, cr, ci = (int(v) for v in coeffs)
    wr = cr * x - ci * y + dr
    wi = cr * y + ci * x + di
    return wr * wr + wi * wi + (cr * cr + ci * ci) * r * r


def enumerate_ball(basis, center, R: float, margin: float = 1e-9) -> np.ndarray:
    """Integer coefficient vectors x with |x B - center| <= R (closed).

    Fincke-Pohst over the Cholesky factor of the Gram matrix; the innermost
    coordinate is enumerated as a whole interval at once.
    """
    B = np.asarray(basis, dtype=float)
    n = B.shape[0]
    center = np.zeros(B.shape[1]) if center is None else np.asarray(center, dtype=float)
    if R < 0:
        return np.zeros((0, n), dtype=np.int64)
    t = np.linalg.solve(B.T, center)
    U = np.linalg.cholesky(B @ B.T).T
    q = np.diag(U) ** 2
    mu = U / np.diag(U)[:, None]
    bound = R * R * (1 + margin) + margin

    found: list[np.ndarray] = []
    x = np.zeros(n, dtype=np.int64)

    def level(i: int, rem: float):
        # offset of coordinate i given the already fixed coordinates j > i
        c = t[i] - float(np.dot(mu[i, i + 1 :], x[i + 1 :] - t[i + 1 :]))
        h = math.sqrt(max(rem, 0.0) / q[i])
        lo, hi = math.ceil(c - h), math.floor(c + h)
        if lo > hi:
            return
        if i == 0:
            block = np.tile(x, (hi - lo + 1, 1))
            block[:, 0] = np.arange(lo, hi + 1)
            found.append(block)
            return
        for v in range(lo, hi + 1):
            x[i] = v
            level(i - 1, rem - q[i] * (v - c) ** 2)
        x[i] = 0

    level(n - 1, bound)
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    X = np.concatenate(found)
    d2 = np.sum((X @ B - center) ** 2, axis=1)
    return X[in_ball(d2, R)]


def reduce_pair(P: H3Point) -> tuple[tuple[GaussianInt, GaussianInt], tuple[GaussianInt, GaussianInt]]:
    """Reduced Z[i]-basis (c, d) pairs of L(P) via Hermitian Gauss reduction."""

    def vec(c: GaussianInt, d: GaussianInt) -> tuple[complex, complex]:
        return (complex(c) * P.z + complex(d), complex(c) * P.r)

    def n2(w):
        return abs(w[0]) ** 2 + abs(w[1]) ** 2

    u = (GaussianInt(0), GaussianInt(1))
    v = (GaussianInt(1), GaussianInt(0))
    for _ in range(10_000):
        if n2(vec(*v)) < n2(vec(*u)):
            u, v = v, u
        wu, wv = vec(*u), vec(*v)
        m = (wv[0] * wu[0].conjugate() + wv[1] * wu[1].conjugate()) / n2(wu)
        k = GaussianInt(round(m.real), round(m.imag))
        if not k:
            return u, v
        v = (v[0] - k * u[0], v[1] - k * u[1])
    raise ArithmeticError("Hermitian reduction did not terminate")


def _rank(vectors: list[np.ndarray]) -> int:
    if not vectors:
        return 0
    return int(np.linalg.matrix_rank(np.array(vectors, dtype=float)))


def successive_minima(lat: Lattice4) -> MinimaProfile:
    """Exact successive minima by enumeration and greedy independent selection."""
    if lat.point is not None:
        P = lat.point
        (_, _), (cv, dv) = reduce_pair(P)
        radius = math.sqrt(abs(complex(cv) * P.z + complex(dv)) ** 2 + abs(complex(cv)) ** 2 * P.r**2)
    else:
        radius = float(np.max(np.linalg.norm(lat.basis, axis=1)))
    X = enumerate_ball(lat.basis, None, radius * (1 + 1e-9))
    X = X[np.any(X != 0, axis=1)]
    if lat.point is not None:
        norms2 = [exact_norm2(lat.point, row) for row in X]
    else:
        norms2 = list(np.sum((X @ lat.basis) ** 2, axis=1))
    order = sorted(range(len(X)), key=lambda k: (norms2[k], tuple(X[k])))
    chosen: list[np.ndarray] = []
    mins: list[float] = []
    for k in order:
        cand = chosen + [X[k]]
        if _rank(cand) == len(cand):
            chosen.append(X[k])
            mins.append(math.sqrt(norms2[k]))
            if len(chosen) == 4:
                break
    if len(chosen) < 4:
        raise ArithmeticError("enumeration radius too small to certify all minima")
    return MinimaProfile(*mins, achieving_vectors=tuple(tuple(int(v) for v in row) for row in chosen))


def count_ball(lat, center, R: float) -> int:
    """Number of lattice points in the closed ball of radius R about center."""
    basis = lat.basis if isinstance(lat, Lattice4) else np.asarray(lat, dtype=float)
    return int(len(enumerate_ball(basis, center, R)))


def count_ball_boxscan(lat, center, R: float) -> int:
    """Same count by scanning the coefficient bounding box (independent oracle)."""
    B = lat.basis if isinstance(lat, Lattice4) else np.asarray(lat, dtype=float)
    n = B.shape[0]
    center = np.zeros(B.shape[1]) if center is None else np.asarray(center, dtype=float)
    Binv = np.linalg.inv(B)
    t = center @ Binv
    half = R * np.linalg.norm(Binv, axis=0) + 1e-9
    ranges = [np.arange(math.ceil(t[i] - half[i]), math.floor(t[i] + half[i]) + 1) for i in range(n)]
    grids = np.meshgrid(*ranges, indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    d2 = np.sum((X @ B - center) ** 2, axis=1)
    return int(np.count_nonzero(in_ball(d2, R)))


def lemma1_bound(profile: MinimaProfile, R: float) -> float:
    total, prod = 1.0, 1.0
    for m in profile.minima:
        prod *= R / m
        total += prod
    return total


def lemma2d_bound(P: H3Point, N, R: float) -> float:
    """1 + R^2 |N| + R^4 / r^2 (implied constant 1)."""
    N = Level.of(N)
    return 1.0 + R * R * N.absval + R**4 / (P.r * P.r)


def minkowski_window(profile: MinimaProfile, P: H3Point) -> float:
    """m1 m2 m3 m4 / r^2."""
    return profile.product / (P.r * P.r)

