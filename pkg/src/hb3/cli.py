"""Command-line driver: hb3 <subcommand> [flags].

Exit status 0 on success, 1 when an invariant fails, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import suites
from .congruence import compose, is_fundamental, reduce
from .counting import (
    DEFAULT_BUDGET,
    AuditFailure,
    CountParams,
    ThresholdViolation,
    count_grid,
    count_M,
    diophantine_audit,
    geometric_side,
)
from .fourier import bessel_k, bessel_k_series, bessel_regime_check
from .gaussian import Level, parse_gaussian, prime_set
from .gon import lattice_of, successive_minima
from .h3geom import H3Point
from .heckeamp import coset_reps
from .records import RecordWriter
from .spectral import SpectralParams, verify_pair

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2

SUBCOMMANDS = ("reduce", "minima", "primes", "cosets", "testfn", "bessel", "count", "audit", "geomside", "verify-all")

# option name -> (type, default); None defaults are resolved per subcommand
_OPTIONS = {
    "level": (str, "1"),
    "point": (str, "0,0,1"),
    "L": (float, 5.0),
    "calL": (float, 1.0),
    "delta": (str, None),
    "delta_grid": (str, None),
    "T": (float, 1.0),
    "A": (float, 3.0),
    "t": (float, None),
    "n": (str, None),
    "samples": (int, 200),
    "seed": (int, 0),
    "jobs": (int, None),
    "budget": (float, float(DEFAULT_BUDGET)),
    "out": (str, None),
}


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", help="squarefree Gaussian level, e.g. 2+1i")
    common.add_argument("--point", help="point x,y,r of upper half-space")
    common.add_argument("--L", help="amplifier length")
    common.add_argument("--calL", help="determinant window: calL <= |l|^2 <= 16 calL")
    common.add_argument("--delta", help="distance bound u <= delta")
    common.add_argument("--delta-grid", dest="delta_grid", help="dyadic deltas in min:max")
    common.add_argument("--T", help="spectral size T >= 1")
    common.add_argument("--A", help="test-function decay A > 2")
    common.add_argument("--t", help="spectral parameter for bessel (defaults to T)")
    common.add_argument("--n", help="determinant for cosets")
    common.add_argument("--samples", help="sample count for bessel")
    common.add_argument("--seed", help="random seed")
    common.add_argument("--jobs", help="worker processes (default $HB3_JOBS or 1)")
    common.add_argument("--budget", help="work budget per determinant for counting")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--config", help="key=value file; flags take precedence")
    p = argparse.ArgumentParser(prog="hb3", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "verify-all":
            sp.add_argument("--full", action="store_true", help="acceptance sizes instead of desk sizes")
    return p


def _read_config(path: str) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = (x.strip() for x in line.split("=", 1))
        k = k.lstrip("-").replace("-", "_")
        if k not in _OPTIONS and k != "full":
            raise UsageError(f"{path}:{lineno}: unknown key {k!r}")
        out[k] = v
    return out


def _resolve(ns: argparse.Namespace) -> argparse.Namespace:
    cfg = _read_config(ns.config) if ns.config else {}
    for key, (typ, default) in _OPTIONS.items():
        raw = getattr(ns, key)
        if raw is None:
            raw = cfg.get(key)
        if raw is None:
            value = default
        else:
            try:
                value = typ(raw)
            except ValueError as exc:
                raise UsageError(f"bad value for --{key.replace('_', '-')}: {raw!r}") from exc
        setattr(ns, key, value)
    if getattr(ns, "full", False) is False and cfg.get("full", "").lower() in ("1", "true", "yes"):
        ns.full = True
    if ns.jobs is None:
        try:
            ns.jobs = int(os.environ.get("HB3_JOBS", "1"))
        except ValueError as exc:
            raise UsageError("HB3_JOBS must be an integer") from exc
    if ns.jobs < 1:
        raise UsageError("--jobs must be positive")
    return ns


def _level(text: str, squarefree: bool = True) -> Level:
    try:
        N = Level.of(parse_gaussian(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if squarefree and not N.squarefree:
        raise UsageError(f"level {text} is not squarefree")
    return N


def _point(text: str) -> H3Point:
    try:
        return H3Point.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _number(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def _deltas(ns) -> list[float]:
    if ns.delta is not None and ns.delta_grid is not None:
        raise UsageError("give either --delta or --delta-grid")
    if ns.delta is not None:
        d = _number(ns.delta)
        if not d > 0:
            raise UsageError("delta must be positive")
        return [d]
    if ns.delta_grid is not None:
        try:
            lo_s, hi_s = ns.delta_grid.split(":")
        except ValueError as exc:
            raise UsageError("--delta-grid takes min:max") from exc
        lo, hi = _number(lo_s), _number(hi_s)
        if not 0 < lo <= hi:
            raise UsageError("--delta-grid needs 0 < min <= max")
        ks = range(math.ceil(math.log2(lo) - 1e-12), math.floor(math.log2(hi) + 1e-12) + 1)
        grid = [2.0**k for k in ks]
        if not grid:
            raise UsageError("--delta-grid contains no power of two")
        return grid
    raise UsageError("give --delta or --delta-grid")


# ---------------------------------------------------------------------------
# subcommands


def cmd_reduce(ns, w: RecordWriter) -> int:
    N, P = _level(ns.level), _point(ns.point)
    Q, witness = reduce(P, N)
    g = compose(witness)
    w.write("reduced", level=N.n, input=P, point=Q, steps=len(witness), matrix=g, fundamental=is_fundamental(Q, N))
    return EXIT_OK


def cmd_minima(ns, w: RecordWriter) -> int:
    P = _point(ns.point)
    lat = lattice_of(P)
    prof = successive_minima(lat)
    w.write(
        "minima",
        point=P,
        m1=prof.m1,
        m2=prof.m2,
        m3=prof.m3,
        m4=prof.m4,
        product_over_r2=prof.product / (P.r * P.r),
        covolume=lat.covolume,
    )
    return EXIT_OK


def cmd_primes(ns, w: RecordWriter) -> int:
    N = _level(ns.level, squarefree=False)
    if ns.L < 2:
        raise UsageError("L must be at least 2")
    for l in prime_set(ns.L, N):
        w.write("prime", l=l, norm=l.norm())
    return EXIT_OK


def cmd_cosets(ns, w: RecordWriter) -> int:
    N = _level(ns.level, squarefree=False)
    status = EXIT_OK
    if ns.n is not None:
        try:
            n = parse_gaussian(ns.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if not n:
            raise UsageError("n must be nonzero")
        w.write("cosets", n=n, level=N.n, count=len(coset_reps(n, N)))
        return status
    for l in prime_set(ns.L, N):
        c1, c2 = len(coset_reps(l, N)), len(coset_reps(l * l, N))
        e1, e2 = l.norm() + 1, l.norm() ** 2 + l.norm() + 1
        ok = c1 == e1 and c2 == e2
        w.write("cosets_prime", l=l, count_l=c1, expected_l=e1, count_l2=c2, expected_l2=e2, ok=ok)
        if not ok:
            status = EXIT_INVARIANT
    return status


def cmd_testfn(ns, w: RecordWriter) -> int:
    try:
        p = SpectralParams(ns.T, ns.A)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = verify_pair(p, seed=ns.seed)
    w.write(
        "testfn",
        T=p.T,
        A=p.A,
        ft_max_dev=rep.ft_max_dev,
        h_min_real=rep.h_min_real,
        h_min_imag=rep.h_min_imag,
        window_min=rep.window_min,
        forms_max_dev=rep.forms_max_dev,
        k_max_rel_dev=rep.k_max_rel_dev,
        boundk_C=rep.boundk_C,
        ok=rep.ok,
    )
    return EXIT_OK if rep.ok else EXIT_INVARIANT


def cmd_bessel(ns, w: RecordWriter) -> int:
    t = ns.T if ns.t is None else ns.t
    P = _point(ns.point)
    if t < 0:
        raise UsageError("t must be nonnegative")
    x = 2 * math.pi * P.r
    w.write("bessel_value", t=t, x=x, quadrature=bessel_k(t, x), series=bessel_k_series(t, x))
    rep = bessel_regime_check(t, P.r, ns.samples, seed=ns.seed)
    for name in sorted(rep.constants):
        w.write("bessel_regime", t=t, r=P.r, sampled=rep.sampled, regime=name, constant=rep.constants[name], worst_n=rep.worst[name])
    return EXIT_OK if rep.finite else EXIT_INVARIANT


def _count_common(ns):
    N, P = _level(ns.level), _point(ns.point)
    if ns.L < 2 or ns.calL < 1:
        raise UsageError("need L >= 2 and calL >= 1")
    return N, P, _deltas(ns)


def _write_report(w: RecordWriter, rep, with_matches: bool) -> None:
    p = rep.params
    w.write(
        "count",
        level=p.N.n,
        point=p.P,
        L=p.L,
        calL=p.calL,
        delta=p.delta,
        M=rep.M,
        M0=rep.M0,
        M1=rep.M1,
        M2=rep.M2,
        M3=rep.M3,
        dets=list(rep.dets),
    )
    if with_matches:
        for m in rep.matches:
            w.write("match", delta=p.delta, l=m.l, gamma=m.gamma, u=m.u, cls=m.cls)
    for name, (count, env, ratio) in rep.envelopes.items():
        w.write("envelope", delta=p.delta, name=name, count=count, envelope=env, ratio=ratio)


def cmd_count(ns, w: RecordWriter) -> int:
    N, P, deltas = _count_common(ns)
    if len(deltas) == 1 and ns.delta is not None:
        rep = count_M(CountParams(P, N, ns.L, ns.calL, deltas[0]), jobs=ns.jobs)
        _write_report(w, rep, with_matches=True)
        return EXIT_OK
    g = count_grid(P, N, ns.L, ns.calL, deltas, budget=ns.budget, jobs=ns.jobs)
    for dl in sorted(g.reports):
        _write_report(w, g.reports[dl], with_matches=False)
    for dl in g.skipped:
        w.write("skipped", delta=dl, reason="over budget")
    return EXIT_OK


def cmd_audit(ns, w: RecordWriter) -> int:
    N, P, deltas = _count_common(ns)
    g = count_grid(P, N, ns.L, ns.calL, deltas, budget=ns.budget, jobs=ns.jobs)
    for dl in sorted(g.reports):
        a = diophantine_audit(g.reports[dl])
        for name in sorted(a.max_slack):
            w.write("audit", delta=dl, checked=a.checked, inequality=name, max_slack=a.max_slack[name])
    for dl in g.skipped:
        w.write("skipped", delta=dl, reason="over budget")
    return EXIT_OK


def cmd_geomside(ns, w: RecordWriter) -> int:
    N, P = _level(ns.level), _point(ns.point)
    if ns.T < 1 or ns.A <= 2 or ns.L < 2:
        raise UsageError("need T >= 1, A > 2, L >= 2")
    gs = geometric_side(P, N, ns.T, ns.L, ns.A, budget=ns.budget, jobs=ns.jobs)
    for dl, bracket, cterm in gs.terms:
        w.write("geomside_term", delta=dl, bracket=bracket, central_term=cterm)
    for dl in gs.infeasible:
        w.write("skipped", delta=dl, reason="over budget")
    w.write(
        "geomside",
        level=N.n,
        point=P,
        T=ns.T,
        L=ns.L,
        A=ns.A,
        value=gs.value,
        argmax_delta=gs.argmax_delta if gs.argmax_delta is not None else math.nan,
        central_sum=gs.central_sum,
        complete=gs.complete,
    )
    return EXIT_OK


def _suite_plan(full: bool, seed: int, jobs: int):
    if full:
        return [
            lambda: suites.suite_gon(200, seed),
            lambda: suites.suite_lemma1(1000, seed),
            lambda: suites.suite_hecke(500, 1000, 100, seed),
            lambda: suites.suite_spectral(seed=seed),
            lambda: suites.suite_circle(3000),
            lambda: suites.suite_counting(seed=seed, jobs=jobs),
        ]
    return [
        lambda: suites.suite_gon(24, seed),
        lambda: suites.suite_lemma1(100, seed),
        lambda: suites.suite_hecke(100, 100, 50, seed),
        lambda: suites.suite_spectral((1, 5), (3, 6), 81, 200, seed),
        lambda: suites.suite_circle(300),
        lambda: suites.suite_counting(
            (1, 3), 1, (5,), [2.0**-k for k in range(13)], budget=20_000, seed=seed, jobs=jobs
        ),
    ]


def cmd_verify_all(ns, w: RecordWriter) -> int:
    status = EXIT_OK
    for run in _suite_plan(ns.full, ns.seed, ns.jobs):
        res = run()
        w.write("suite", name=res.name, passed=res.passed)
        for key in sorted(res.metrics):
            w.write("metric", suite=res.name, key=key, value=res.metrics[key])
        for msg in res.failures:
            w.write("failure", suite=res.name, message=msg)
        if not res.passed:
            status = EXIT_INVARIANT
    w.write("summary", seed=ns.seed, full=ns.full, passed=status == EXIT_OK)
    return status


COMMANDS = {
    "reduce": cmd_reduce,
    "minima": cmd_minima,
    "primes": cmd_primes,
    "cosets": cmd_cosets,
    "testfn": cmd_testfn,
    "bessel": cmd_bessel,
    "count": cmd_count,
    "audit": cmd_audit,
    "geomside": cmd_geomside,
    "verify-all": cmd_verify_all,
}


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        ns = _resolve(ns)
        if ns.out:
            with open(ns.out, "w") as fh:
                return COMMANDS[ns.command](ns, RecordWriter(fh))
        return COMMANDS[ns.command](ns, RecordWriter(stdout))
    except UsageError as exc:
        print(f"hb3: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AuditFailure, ThresholdViolation) as exc:
        print(f"hb3: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"hb3: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
