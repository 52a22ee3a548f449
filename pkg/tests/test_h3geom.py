import math

import numpy as np
import pytest

from hb3.h3geom import (
    ComplexMatrix2,
    H3Point,
    J,
    Quaternion,
    act,
    im_ratio,
    point_pair_u,
    principal_sqrt,
    qinv,
    qmul,
    u_via_normalized,
)

I = Quaternion(0, 1, 0, 0)
Jq = Quaternion(0, 0, 1, 0)
K = Quaternion(0, 0, 0, 1)
INV = ((0, -1), (1, 0))


def close(P, Q, tol=1e-9):
    return point_pair_u(P, Q) < tol


def random_sl2(rng):
    while True:
        a, b, c = (complex(*rng.normal(size=2)) for _ in range(3))
        if abs(a) > 0.3:
            return ComplexMatrix2(a, b, c, (1 + b * c) / a)


def random_point(rng):
    return H3Point(*rng.normal(size=2), math.exp(rng.uniform(-1.5, 1.5)))


def test_hamilton_relations():
    assert qmul(I, Jq) == K
    assert qmul(Jq, I) == -K
    assert qinv(Jq) == -Jq
    with pytest.raises(ZeroDivisionError):
        qinv(Quaternion(0))


def test_norm_multiplicative():
    rng = np.random.default_rng(3)
    for _ in range(200):
        p, q = Quaternion(*rng.normal(size=4)), Quaternion(*rng.normal(size=4))
        assert math.isclose(qmul(p, q).norm(), p.norm() * q.norm(), rel_tol=1e-12)
        one = qmul(q, qinv(q))
        assert np.allclose(one.as_tuple(), (1, 0, 0, 0), atol=1e-12)


def test_point_validation_and_parse():
    with pytest.raises(ValueError):
        H3Point(0, 0, 0)
    with pytest.raises(ValueError):
        H3Point(0, 0, -1)
    P = H3Point.parse("0.25,-1,3")
    assert (P.zre, P.zim, P.r) == (0.25, -1.0, 3.0)
    assert H3Point.parse(str(P)) == P
    with pytest.raises(ValueError):
        H3Point.parse("1,2")


def test_act_examples():
    P = H3Point(0.3, -0.7, 1.9)
    assert close(act(((1, 0), (0, 1)), P), P)
    assert close(act(INV, J), J)
    assert close(act(((2 - 1j, 0), (0, 2 - 1j)), P), P)
    with pytest.raises(ValueError):
        act(((1, 1), (1, 1)), P)


def test_act_non_sl2_determinant():
    # diag(l, 1) is z -> l z, r -> |l| r
    P = H3Point(0.5, 0.25, 2.0)
    Q = act(((3 + 4j, 0), (0, 1)), P)
    z = (3 + 4j) * P.z
    assert math.isclose(Q.zre, z.real) and math.isclose(Q.zim, z.imag)
    assert math.isclose(Q.r, 5 * P.r)


def test_im_ratio_examples():
    P = H3Point(0.4, 0.1, 0.8)
    assert im_ratio(((1, 0), (0, 1)), P) == 1
    assert im_ratio(((1, 1), (0, 1)), P) == 1
    assert math.isclose(im_ratio(INV, P), 1 / (abs(P.z) ** 2 + P.r**2), rel_tol=1e-15)


def test_point_pair_u_examples():
    P = H3Point(1.5, -2, 0.3)
    assert point_pair_u(P, P) == 0
    assert point_pair_u(J, H3Point(0, 0, 2)) == 0.25
    assert math.isclose(math.cosh(math.log(2)) - 1, 0.25, rel_tol=1e-15)
    assert point_pair_u(J, H3Point(1, 0, 1)) == 0.5


def test_u_via_normalized_examples():
    assert u_via_normalized(((1, 0), (0, 1)), J) == 0
    assert math.isclose(u_via_normalized(((1, 0), (1, 1)), J), 0.5, rel_tol=1e-15)


def test_principal_sqrt_branch():
    for l in (1, -1, 1j, -1j, 3 + 4j, -7 + 24j, -4, -5 - 12j):
        s = principal_sqrt(l)
        assert abs(s * s - l) < 1e-12 * max(1, abs(l))
        assert 0 <= math.atan2(s.imag, s.real) < math.pi
    assert principal_sqrt(-4) == 2j


def test_isometry_invariance():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        g = random_sl2(rng)
        P1, P2 = random_point(rng), random_point(rng)
        u0 = point_pair_u(P1, P2)
        u1 = point_pair_u(act(g, P1), act(g, P2))
        assert abs(u1 - u0) <= 1e-9 * max(1.0, u0)


def test_ratio_identity():
    rng = np.random.default_rng(12)
    for _ in range(500):
        g = random_sl2(rng).scaled(complex(*rng.normal(size=2)))
        P = random_point(rng)
        assert math.isclose(act(g, P).r, im_ratio(g, P) * P.r, rel_tol=1e-12)


def test_quaternion_identity_pcp():
    # P c P = -r^2 conj(c) + c z^2 + re(2 r c z) j, no k-part
    rng = np.random.default_rng(13)
    for _ in range(500):
        c = complex(*rng.normal(size=2))
        P = random_point(rng)
        q = P.quaternion()
        lhs = qmul(q, c * q)
        w = -(P.r**2) * c.conjugate() + c * P.z**2
        rhs = Quaternion(w.real, w.imag, (2 * P.r * c * P.z).real, 0.0)
        assert np.allclose(lhs.as_tuple(), rhs.as_tuple(), rtol=1e-12, atol=1e-12 * lhs.norm())


def test_symmetry():
    rng = np.random.default_rng(14)
    for _ in range(300):
        P1, P2 = random_point(rng), random_point(rng)
        assert point_pair_u(P1, P2) == point_pair_u(P2, P1)
        g = random_sl2(rng)
        a = point_pair_u(act(g, P1), P1)
        b = point_pair_u(P1, act(g.inverse(), P1))
        assert abs(a - b) <= 1e-9 * max(1.0, a)


def test_u_via_normalized_matches_action():
    rng = np.random.default_rng(15)
    for _ in range(500):
        g = [complex(*map(int, rng.integers(-6, 7, 2))) for _ in range(4)]
        m = ComplexMatrix2(*g)
        if m.det == 0:
            continue
        P = random_point(rng)
        u1 = u_via_normalized(m, P)
        u2 = point_pair_u(act(m, P), P)
        assert abs(u1 - u2) <= 1e-9 * max(1.0, u2)
