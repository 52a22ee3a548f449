import math

import mpmath
import numpy as np
import pytest

from hb3.fourier import (
    CoefficientTable,
    bessel_k,
    bessel_k_series,
    bessel_regime_check,
    circle_count,
    eval_expansion,
)
from hb3.gaussian import GaussianInt
from hb3.h3geom import H3Point

G = GaussianInt


def test_k0_at_one():
    assert abs(bessel_k(0, 1) - 0.4210244382) <= 1e-8
    assert abs(bessel_k_series(0, 1) - 0.4210244382) <= 1e-8


def test_bessel_even_in_t():
    for t, x in ((3.0, 2.0), (12.5, 7.0), (0.5, 0.3)):
        assert bessel_k(-t, x) == bessel_k(t, x)


@pytest.mark.parametrize("x", [5.0, 20.0, 80.0])
def test_k0_large_x_envelope(x):
    assert 0 < bessel_k(0, x) <= math.exp(-x) * math.sqrt(math.pi / (2 * x)) * (1 + 1 / x)


def test_bessel_domain():
    with pytest.raises(ValueError):
        bessel_k(1, 0)
    with pytest.raises(ArithmeticError):
        bessel_k(1, 1e-9)


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 10.0, 25.0, 50.0])
def test_bessel_quadrature_vs_series(t):
    for x in (0.1, 0.7, 2.0, 9.0, 30.0, 100.0):
        a, b = bessel_k(t, x), bessel_k_series(t, x)
        assert abs(a - b) <= 1e-8 * abs(b), (t, x, a, b)


def test_bessel_against_mpmath_besselk():
    for t, x in ((1.0, 1.0), (7.0, 3.0), (20.0, 15.0), (40.0, 60.0)):
        want = float(mpmath.re(mpmath.besselk(1j * t, x)))
        assert abs(bessel_k(t, x) - want) <= 1e-8 * abs(want)


def test_regime_check():
    rep = bessel_regime_check(10.0, 0.1, samples=60)
    assert rep.finite and rep.sampled > 10
    assert {"transition", "exp_decay"} <= set(rep.constants)
    rep0 = bessel_regime_check(0.0, 0.5, samples=40)
    assert rep0.finite and "small_t" in rep0.constants
    with pytest.raises(ValueError):
        bessel_regime_check(-1.0, 0.1)


def test_regime_exp_decay():
    # beyond |n| > t/r the scaled values decay like e^{-|n| r}
    t, r = 5.0, 0.2
    ms = np.array([30.0, 40.0, 50.0, 60.0])
    vals = [math.cosh(math.pi * t / 2) * bessel_k(t, 2 * math.pi * m * r) / math.exp(-m * r) for m in ms]
    assert all(np.diff(vals) < 0)


def test_circle_examples():
    assert circle_count(1) == 4
    assert circle_count(10) == 316
    assert circle_count(0.5) == 0
    assert circle_count(0) == 0
    assert circle_count(math.sqrt(2)) == 8
    with pytest.raises(ValueError):
        circle_count(-1)


def test_circle_brute_force():
    for X in (1.5, 2.0, 3.7, 7.0, 12.25):
        m = int(X) + 1
        want = sum(1 for a in range(-m, m + 1) for b in range(-m, m + 1) if 1 <= a * a + b * b <= X * X)
        assert circle_count(X) == want


def test_circle_envelope_small():
    for X in range(1, 400):
        assert abs(circle_count(X) - math.pi * X * X) <= 10 * X ** (2 / 3)


def test_expansion_zero_coefficients():
    res = eval_expansion(H3Point(0.1, 0.2, 0.5), CoefficientTable(), 3.0)
    assert res.value == 0 and res.terms == 0


def test_expansion_single_pair():
    r, t = 0.4, 2.0
    res = eval_expansion(H3Point(0, 0, r), CoefficientTable({G(1): 1}), t)
    assert res.terms == 2
    assert abs(res.value - 2 * r * bessel_k(t, 2 * math.pi * r)) < 1e-15


def test_expansion_translation_and_symmetry():
    rng = np.random.default_rng(61)
    vals = {}
    for a in range(-3, 4):
        for b in range(0, 4):
            n = G(a, b)
            if n and -n not in vals:
                vals[n] = complex(*rng.normal(size=2))
    coeffs = CoefficientTable(vals)
    assert all(coeffs[n] == coeffs[-n] for n in coeffs.values)
    P = H3Point(0.23, -0.41, 0.6)
    base = eval_expansion(P, coeffs, 1.5).value
    for k in (G(1), G(0, 1), G(-2, 3)):
        Q = H3Point(P.zre + k.re, P.zim + k.im, P.r)
        assert abs(eval_expansion(Q, coeffs, 1.5).value - base) <= 1e-12 * max(1, abs(base))
    # rho(-n) = rho(n) makes the sum even in z
    neg = eval_expansion(H3Point(-P.zre, -P.zim, P.r), coeffs, 1.5).value
    assert abs(neg - base) <= 1e-12 * max(1, abs(base))


def test_coefficient_table_checks(tmp_path):
    with pytest.raises(ValueError):
        CoefficientTable({G(1): 1, G(-1): 2})
    f = tmp_path / "rho.txt"
    f.write_text("1 1 0\n2+1i 0.5 -0.5\n")
    tab = CoefficientTable.from_file(f)
    assert tab[G(-2, -1)] == 0.5 - 0.5j and tab[G(3)] == 0
    f.write_text("1 1\n")
    with pytest.raises(ValueError):
        CoefficientTable.from_file(f)


def test_expansion_cutoff_flag():
    res = eval_expansion(H3Point(0, 0, 0.05), CoefficientTable({G(1): 1}), 1.0)
    assert not res.sufficient and res.tail_estimate < 1e-8
    res = eval_expansion(H3Point(0, 0, 1.0), CoefficientTable({G(1): 1}, cutoff=100), 1.0)
    assert res.sufficient
