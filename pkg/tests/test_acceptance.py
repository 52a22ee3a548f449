"""Acceptance criteria at full size, one PASS/FAIL line each.

Run under pytest (lines appear in the -v log) or directly:
    python3 tests/test_acceptance.py
"""

import subprocess
import sys
import time

import pytest

from hb3 import suites
from hb3.counting import DEFAULT_BUDGET

SEED = 0


def _report(label, ok, detail, out=print):
    out(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")


def _show(capsys, label, ok, detail):
    if capsys is None:
        _report(label, ok, detail)
        return
    with capsys.disabled():
        _report(label, ok, detail, out=lambda s: print("\n" + s))


def _timed(fn):
    t = time.perf_counter()
    res = fn()
    return res, time.perf_counter() - t


def _suite_check(capsys, label, fn, limit):
    res, secs = _timed(fn)
    ok = res.passed and secs < limit
    metrics = ", ".join(f"{k}={v:.10g}" if isinstance(v, float) else f"{k}={v}" for k, v in sorted(res.metrics.items()))
    _show(capsys, label, ok, f"{secs:.1f}s (limit {limit}s); {metrics}; failures={res.failures[:3]}")
    return res, secs


def check_gon(capsys=None):
    res, secs = _suite_check(capsys, "1 gon minima", lambda: suites.suite_gon(200, SEED, max_norm=40), 60)
    assert res.passed, res.failures
    assert res.metrics["max_pair_gap"] <= 1e-12
    assert 1 / 16 <= res.metrics["window_min"] and res.metrics["window_max"] <= 16
    assert secs < 60


def check_lemma1(capsys=None):
    res, secs = _suite_check(capsys, "2 lemma1 ball count", lambda: suites.suite_lemma1(1000, SEED), 60)
    assert res.passed, res.failures
    assert res.metrics["max_ratio"] <= suites.C4
    assert secs < 60


def check_hecke(capsys=None):
    res, secs = _suite_check(capsys, "3 hecke", lambda: suites.suite_hecke(500, 1000, 100, SEED), 30)
    assert res.passed, res.failures
    assert res.metrics["mult_residual"] <= 1e-10 and res.metrics["floor"] >= 0.5
    assert secs < 30


def check_spectral(capsys=None):
    res, secs = _suite_check(capsys, "4 spectral pair", lambda: suites.suite_spectral((1, 5, 25), (3, 6, 10), seed=SEED), 60)
    assert res.passed, res.failures
    for T in (1, 5, 25):
        for A in (3, 6, 10):
            assert res.metrics[f"T{T}_A{A}_ft_dev"] <= 1e-6
            assert res.metrics[f"T{T}_A{A}_window_min"] > 1 / 8
            C = res.metrics[f"T{T}_A{A}_boundk_C"]
            assert C == C and C < float("inf")
    assert secs < 60


def check_counting(capsys=None):
    res, secs = _suite_check(
        capsys,
        "5 counting grid",
        lambda: suites.suite_counting(suites.COUNTING_LEVELS, 5, (5, 9, 13), [2.0**-k for k in range(21)], DEFAULT_BUDGET, 700, SEED),
        600,
    )
    assert res.passed, res.failures
    assert res.metrics["combos"] == 5 * 6 * 3 * 3 and res.metrics["oracle_checks"] > 0
    assert secs < 600


def check_circle(capsys=None):
    res, secs = _suite_check(capsys, "6 circle and K0(1)", lambda: suites.suite_circle(3000), 30)
    assert res.passed, res.failures
    assert res.metrics["max_scaled_error"] <= 10
    assert abs(res.metrics["K0_1"] - 0.4210244382) <= 1e-8
    assert secs < 30


def _verify_all(jobs):
    cmd = [sys.executable, "-m", "hb3.cli", "verify-all", "--seed", "7", "--jobs", str(jobs)]
    proc = subprocess.run(cmd, capture_output=True, check=False)
    return proc.returncode, proc.stdout


def check_determinism(capsys=None):
    runs = {jobs: [_verify_all(jobs) for _ in range(2)] for jobs in (1, 8)}
    outs = [out for rs in runs.values() for _, out in rs]
    codes = [code for rs in runs.values() for code, _ in rs]
    same = all(o == outs[0] for o in outs)
    ok = same and codes == [0] * 4 and len(outs[0]) > 0
    _show(capsys, "7 determinism", ok, f"4 runs (jobs 1, 1, 8, 8), exit codes {codes}, byte-identical={same}, {len(outs[0])} bytes")
    assert ok


CHECKS = [check_gon, check_lemma1, check_hecke, check_spectral, check_counting, check_circle, check_determinism]


@pytest.mark.parametrize("check", CHECKS, ids=[c.__name__.removeprefix("check_") for c in CHECKS])
def test_acceptance(check, capsys):
    check(capsys)


if __name__ == "__main__":
    failed = 0
    for check in CHECKS:
        try:
            check()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
