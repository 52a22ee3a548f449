import dataclasses
import math

import numpy as np
import pytest

from hb3.congruence import IntMatrix2
from hb3.counting import (
    AuditFailure,
    CountParams,
    CountReport,
    MatchClass,
    ThresholdViolation,
    classify,
    count_grid,
    count_M,
    det_set,
    diophantine_audit,
    dyadic_grid,
    enumerate_matches,
    enumerate_matches_boxscan,
    envelope_report,
    geometric_side,
    parabolic_threshold_ok,
    window,
)
from hb3.gaussian import GaussianInt, Level, ggcd, gsqrt
from hb3.h3geom import J, act, point_pair_u
from hb3.suites import random_reduced_points

G = GaussianInt
UNITS = [G(1), G(-1), G(0, 1), G(0, -1)]


def gammas(matches):
    return [m.gamma for m in matches]


@pytest.fixture(scope="module")
def points():
    rng = np.random.default_rng(71)
    out = {}
    for N in (G(1), G(1, 1), G(3)):
        out[N] = [J, *random_reduced_points(Level.of(N), 2, rng)]
    return out


def test_det_set_examples():
    assert det_set(5, 1) == [G(1)]
    assert det_set(5, 25) == [G(3, 4)]
    assert det_set(5, 625) == [G(-7, 24)]
    assert G(2, 1) ** 4 == G(-7, 24)
    assert det_set(5, 30) == []


def test_det_set_norm_window():
    for L in (9, 13):
        for cl in (1, L**2, L**4):
            for l in det_set(L, cl):
                assert cl <= l.norm() <= 16 * cl


def test_window_solves_equation():
    for delta in (1e-6, 0.1, 0.5, 1.0, 7.0):
        lo, hi = window(delta)
        for x in (lo, hi):
            assert math.isclose(0.5 * (x - 1 / x) ** 2, delta, rel_tol=1e-12)
        assert math.isclose(lo * hi, 1.0)


def test_classify_examples():
    assert classify(((1, 1), (0, 1))) is MatchClass.C_ZERO
    assert classify(((1, 0), (1, 1))) is MatchClass.PARABOLIC
    assert classify(((0, -1), (1, 0))) is MatchClass.GENERIC
    # (a - d)^2 + 4bc with complex entries: a = 1 + 2i, d = 1, b = i, c = 1 -> (2i)^2 + 4i != 0
    assert classify(((G(1, 2), G(0, 1)), (1, 1))) is MatchClass.GENERIC
    assert classify(((G(1, 1), G(0, 1)), (G(0, 1), G(1, -1)))) is MatchClass.GENERIC
    assert classify(((G(2, 1), -1), (1, G(0, 1)))) is MatchClass.PARABOLIC


def test_stabilizer_example():
    ms = enumerate_matches(J, 1, 1, 0.1)
    assert len(ms) == 8 and all(m.u == 0 for m in ms)
    want = {IntMatrix2(u, 0, 0, v) for u in UNITS for v in UNITS if u * v == G(1)}
    want |= {IntMatrix2(0, u, v, 0) for u in UNITS for v in UNITS if -u * v == G(1)}
    assert set(gammas(ms)) == want
    assert gammas(ms) == gammas(enumerate_matches_boxscan(J, 1, 1, 0.1))


def test_level_three_kills_antidiagonal():
    ms = enumerate_matches(J, 3, 1, 0.1)
    assert len(ms) == 4 and all(m.cls is MatchClass.C_ZERO and not m.gamma.b for m in ms)


def test_translations_enter_at_half():
    T = IntMatrix2(1, 1, 0, 1)
    assert T in gammas(enumerate_matches(J, 1, 1, 0.5))
    assert T not in gammas(enumerate_matches(J, 1, 1, 0.4999))
    assert len(enumerate_matches(J, 1, 1, 0.5)) == 72


def test_count_M_example():
    rep = count_M(CountParams(J, 1, 5, 1, 0.1))
    assert (rep.M, rep.M0, rep.M1, rep.M2, rep.M3) == (8, 4, 4, 0, 4)
    assert set(rep.envelopes) >= {"first_bound", "c_zero", "parabolic"}
    assert all(math.isfinite(v[2]) for v in rep.envelopes.values())


def test_count_M_empty_window():
    rep = count_M(CountParams(J, 1, 5, 30, 0.5))
    assert (rep.M, rep.M0, rep.M1, rep.M2, rep.M3) == (0, 0, 0, 0, 0) and rep.dets == []


def test_params_validation():
    with pytest.raises(ValueError):
        CountParams(J, 2, 5, 1, 0.1)
    with pytest.raises(ValueError):
        CountParams(J, 1, 1.5, 1, 0.1)
    with pytest.raises(ValueError):
        CountParams(J, 1, 5, 0.5, 0.1)
    with pytest.raises(ValueError):
        CountParams(J, 1, 5, 1, 0)


def test_monotone_in_delta(points):
    for P in points[G(1)]:
        a = count_M(CountParams(P, 1, 5, 25, 0.1), envelopes=False)
        b = count_M(CountParams(P, 1, 5, 25, 0.2), envelopes=False)
        assert b.M >= a.M and set(gammas(a.matches)) <= set(gammas(b.matches))


@pytest.mark.parametrize("N", [G(1), G(1, 1), G(3)])
def test_oracle_equivalence(points, N):
    for P in points[N]:
        for l in (G(1), G(1, 1), G(2, 1), G(3, 4), G(3)):
            for delta in (0.05, 0.4, 1.0):
                got = enumerate_matches(P, N, l, delta)
                want = enumerate_matches_boxscan(P, N, l, delta)
                assert gammas(got) == gammas(want), (P, N, l, delta)


def test_matches_satisfy_definition(points):
    for P in points[G(1, 1)]:
        for m in enumerate_matches(P, G(1, 1), G(3, 4), 0.6):
            g = m.gamma
            assert g.det == m.l and G(1, 1).divides(g.c)
            assert ggcd(g.a, G(1, 1)).is_unit()
            u = point_pair_u(act(g.to_complex(), P), P)
            assert abs(u - m.u) <= 1e-9 * max(1, u) and m.u <= 0.6 + 1e-12
            assert m.within(0.6) and classify(g) is m.cls


def test_level_antimonotone(points):
    for N, Np in ((G(1), G(3)), (G(1, 1), G(1, 1) * G(2, 1))):
        for P in points[N]:
            for l in (G(1), G(3, 4)):
                big = set(gammas(enumerate_matches(P, N, l, 0.7)))
                small = set(gammas(enumerate_matches(P, Np, l, 0.7)))
                assert small <= big


def test_parabolic_structure():
    found = 0
    for l in (G(1), G(3, 4), G(-4)):
        for m in enumerate_matches(J, 1, l, 1.0):
            if m.cls is MatchClass.PARABOLIC:
                found += 1
                s = gsqrt(m.l)
                assert s is not None
                tr = m.gamma.a + m.gamma.d
                assert tr == 2 * s or tr == -2 * s
    assert found > 0


def test_audit_identity_and_matches(points):
    rep = count_M(CountParams(J, 1, 5, 1, 0.1), envelopes=False)
    audit = diophantine_audit(rep)
    assert audit.passed and audit.checked == 8
    assert audit.max_slack["height_window"] == 0 and audit.max_slack["complex_part"] == 0
    for P in points[G(1)]:
        rep = count_M(CountParams(P, 1, 5, 25, 0.8), envelopes=False)
        assert diophantine_audit(rep).passed


def test_audit_flags_bad_match():
    rep = count_M(CountParams(J, 1, 5, 1, 0.1), envelopes=False)
    bad = dataclasses.replace(rep.matches[0], gamma=IntMatrix2(1, 5, 0, 1))
    rep.matches.append(bad)
    with pytest.raises(AuditFailure) as exc:
        diophantine_audit(rep)
    assert "[[1+0i,5+0i]" in str(exc.value)
    assert not diophantine_audit(rep, strict=False).passed


def test_parabolic_threshold():
    # P = j, calL = 1: parabolic matches need delta >= 1/8
    for delta in (0.05, 0.1, 0.124):
        rep = count_M(CountParams(J, 1, 5, 1, delta))
        assert rep.M2 == 0
    rep = count_M(CountParams(J, 1, 5, 1, 0.5))
    assert rep.M2 > 0 and parabolic_threshold_ok(rep)
    forged = CountReport.from_matches(CountParams(J, 1, 5, 1, 0.1), [G(1)], rep.matches)
    assert not parabolic_threshold_ok(forged)
    with pytest.raises(ThresholdViolation):
        envelope_report(forged)


def test_decomposition_guard():
    rep = count_M(CountParams(J, 1, 5, 1, 0.1))
    rep.M1 += 1
    with pytest.raises(ThresholdViolation):
        envelope_report(rep)


def test_count_grid_agrees_with_count_M(points):
    P = points[G(1)][1]
    deltas = [2.0**-k for k in range(0, 8)]
    g = count_grid(P, 1, 5, 25, deltas, envelopes=False)
    assert g.delta_run == 1.0 and not g.skipped
    for dl in deltas:
        one = count_M(CountParams(P, 1, 5, 25, dl), envelopes=False)
        assert gammas(g.reports[dl].matches) == gammas(one.matches)
    tight = count_grid(P, 1, 5, 25, deltas, budget=1, envelopes=False)
    assert tight.delta_run is None and tight.skipped == sorted(deltas)


def test_jobs_do_not_change_results(points):
    P = points[G(1)][2]
    a = count_M(CountParams(P, 1, 13, 169, 0.3), jobs=1, envelopes=False)
    b = count_M(CountParams(P, 1, 13, 169, 0.3), jobs=3, envelopes=False)
    assert len(a.dets) > 1
    assert gammas(a.matches) == gammas(b.matches)
    assert [m.u for m in a.matches] == [m.u for m in b.matches]


def test_dyadic_grid():
    assert dyadic_grid(10) == [2.0**-k for k in range(6, -1, -1)]
    assert dyadic_grid(1) == []
    assert dyadic_grid(4, 0.25) == [0.125, 0.25]


def test_geometric_side_example():
    gs = geometric_side(J, 1, 10, 5, 4, budget=None)
    assert gs.complete and math.isfinite(gs.value)
    capped = geometric_side(J, 1, 10, 5, 4)
    assert not capped.complete and capped.infeasible == [d for d, _, _ in gs.terms if d not in {t[0] for t in capped.terms}]
    assert dict((d, b) for d, b, _ in capped.terms) == {d: b for d, b, _ in gs.terms if d not in capped.infeasible}
    for dl, bracket, _ in gs.terms:
        assert bracket >= min(100, 10 / math.sqrt(dl)) / 5
    # the smallest cell sits just above T^-2 where min(T^2, T/sqrt(delta)) is close to T^2
    small = min(gs.terms)[0]
    assert small == 2.0**-6


def test_geometric_side_scales_with_T():
    a = geometric_side(J, 1, 4, 5, 4)
    b = geometric_side(J, 1, 8, 5, 4)
    # both grids contain delta = 1/8; at that cell min(T^2, T/sqrt(delta)) is T sqrt(8)
    ta = dict((d, v) for d, v, _ in a.terms)
    tb = dict((d, v) for d, v, _ in b.terms)
    assert math.isclose(tb[0.125] / ta[0.125], 2.0, rel_tol=1e-12)
    # smallest cell: delta = 2^-3 for T = 4 and 2^-5 for T = 8, where the weight is at most T^2
    assert min(ta) == 2.0**-3 and min(tb) == 2.0**-5
