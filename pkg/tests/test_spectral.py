import math

import mpmath
import numpy as np
import pytest

from hb3 import spectral
from hb3.spectral import (
    SpectralParams,
    boundh_window,
    boundk_constant,
    fourier_h,
    g_fn,
    g_prime,
    h_fn,
    h_fn_ratio,
    k_fn,
    k_via_g,
    v_of_u,
    verify_pair,
)

P13 = SpectralParams(1.0, 3.0)
GRID = [SpectralParams(T, A) for T in (1, 5, 25) for A in (3, 6, 10)]


def sech(x):
    return 1 / math.cosh(x)


def test_params_validation():
    with pytest.raises(ValueError):
        SpectralParams(0.5, 3)
    with pytest.raises(ValueError):
        SpectralParams(1, 2)
    assert SpectralParams.from_t(-7.5).T == 7.5
    assert SpectralParams.from_t(0.2).T == 1


def test_g_examples():
    assert g_fn(0.0, P13) == 3 / (2 * math.pi)
    x = np.linspace(-3, 3, 61)
    assert np.array_equal(g_fn(x, P13), g_fn(-x, P13))
    assert math.isclose(g_fn(1.0, P13), 3 * math.cos(1) / (2 * math.pi * math.cosh(3)), rel_tol=1e-15)


def test_g_prime_against_mpmath():
    p = SpectralParams(4.0, 3.5)
    for x in (-1.2, 0.0, 0.3, 2.0):
        want = mpmath.diff(lambda s: p.A * mpmath.cos(p.T * s) / (2 * mpmath.pi * mpmath.cosh(p.A * s)), x)
        assert abs(g_prime(x, p) - float(want)) < 1e-12


@pytest.mark.parametrize("p", GRID)
def test_h_examples(p):
    assert math.isclose(h_fn(p.T, p).real, 0.25 + 0.25 * sech(math.pi * p.T / p.A), rel_tol=1e-14)
    assert math.isclose(h_fn(0, p).real, 0.5 * sech(math.pi * p.T / (2 * p.A)), rel_tol=1e-14)
    assert h_fn(p.T, p).real > 0.25


def test_h_pole_region_rejected():
    with pytest.raises(ValueError):
        h_fn(3j, P13)
    with pytest.raises(ValueError):
        h_fn_ratio(1 - 3.5j, P13)


@pytest.mark.parametrize("p", GRID)
def test_h_forms_agree_even_and_real(p):
    rng = np.random.default_rng(51)
    for t in rng.uniform(-40, 40, 100):
        a, b = h_fn(t, p), h_fn_ratio(t, p)
        assert abs(a - b) <= 1e-12
        assert h_fn(-t, p) == a and a.imag == 0 and a.real > 0
    for s in rng.uniform(-0.98, 0.98, 50):
        t = 1j * s * p.A
        v = h_fn(t, p)
        assert abs(v - h_fn_ratio(t, p)) <= 1e-12 * max(1, abs(v))
        assert abs(v.imag) < 1e-12 and v.real > 0


@pytest.mark.parametrize("p", GRID)
def test_boundh_window(p):
    m, n = boundh_window(p, 1000, seed=3)
    assert n > 990 and m > 1 / 8


def test_k_limit_and_closed_form():
    for p in GRID:
        k0 = (p.A * p.T**2 + p.A**3) / (4 * math.pi**2)
        assert math.isclose(k_fn(0.0, p), k0, rel_tol=1e-14)
        assert math.isclose(k_fn(1e-12, p), k0, rel_tol=1e-5)
    v = math.log(2 + math.sqrt(3))
    assert math.isclose(v_of_u(1.0), v, rel_tol=1e-15)
    want = -g_prime(v, P13) / (2 * math.pi * math.sqrt(3))
    assert math.isclose(k_fn(1.0, P13), want, rel_tol=1e-12)
    with pytest.raises(ValueError):
        k_fn(-0.1, P13)


@pytest.mark.parametrize("p", GRID)
def test_k_matches_g_route(p):
    u = np.logspace(-6, 3, 400)
    k0 = k_fn(0.0, p)
    assert np.max(np.abs(k_fn(u, p) - k_via_g(u, p))) <= 1e-10 * k0


def k_mp(u, p):
    with mpmath.workdps(50):
        u = mpmath.mpf(u)
        v = mpmath.log(1 + u + mpmath.sqrt(u * u + 2 * u))
        num = p.A * (p.T * mpmath.sin(p.T * v) + p.A * mpmath.cos(p.T * v) * mpmath.tanh(p.A * v))
        return float(num / ((2 * mpmath.pi) ** 2 * mpmath.sqrt(u * u + 2 * u) * mpmath.cosh(p.A * v)))


def test_k_small_u_against_high_precision():
    for p in GRID:
        for u in np.logspace(-14, 0, 57):
            assert abs(k_fn(u, p) - k_mp(u, p)) <= 1e-11 * k_fn(0.0, p)


@pytest.mark.parametrize("p", GRID)
def test_boundk_constant_finite(p):
    C = boundk_constant(p)
    assert math.isfinite(C) and C > 0


def test_fourier_against_mpmath():
    p = SpectralParams(5.0, 6.0)
    for t in (0.0, 3.3, -11.0):
        want = mpmath.quad(lambda x: p.A * mpmath.cos(p.T * x) / (2 * mpmath.pi * mpmath.cosh(p.A * x)) * mpmath.cos(t * x), [-mpmath.inf, 0, mpmath.inf])
        val, err, ok = fourier_h(t, p)
        assert ok and abs(val - float(want)) < 1e-10 and err < 1e-8


def test_verify_pair_example():
    rep = verify_pair(P13, window_samples=200)
    assert rep.ok
    assert rep.ft_max_dev <= 1e-6 and rep.k_max_rel_dev <= 1e-10
    assert len(rep.records) == 401 and rep.h_min_imag > 0


def test_pair_wrapper():
    pair = spectral.TestFunctionPair(P13)
    assert pair.g(0.5) == g_fn(0.5, P13)
    assert pair.h(2.0) == h_fn(2.0, P13)
    assert pair.k(0.3) == k_fn(0.3, P13)
