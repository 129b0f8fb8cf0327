"""Acceptance criteria, one printed PASS/FAIL line each.

Runs every suite of the shipped config once (timed), checks the measured values
against the acceptance thresholds, then reruns the full config through the CLI
and compares every report file byte for byte.

    pytest tests/test_acceptance.py        # or: python3 tests/test_acceptance.py
"""
import io
import itertools
import math
import sys
import time
from fractions import Fraction as Fr
from pathlib import Path

import pytest

from kinavg.averaging_verifier import CaseError, TheoremCase, predicted_gain
from kinavg.cli import run, write_report
from kinavg.config import load
from kinavg.experiments import SUITES, Runner

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "default.ini"
BUDGET_S = {"identities": 60, "dispersive": 60, "verify": 600, "counterexample": 120, "lambda-strip": 300}


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("first")
    runner = Runner(load(CONFIG).with_overrides(out=str(out)))
    reports, seconds = {}, {}
    for name, suite in SUITES.items():
        start = time.perf_counter()
        reports[name] = suite(runner)
        seconds[name] = time.perf_counter() - start
        write_report(reports[name], out)
    return out, reports, seconds


def _checks(report):
    return {c.name: c for c in report.checks}


def _emit(request, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    capman = request.config.pluginmanager.getplugin("capturemanager")
    if capman is None:
        print(line)
    else:
        with capman.global_and_fixture_disabled():
            print("\n" + line)
    assert ok, line


def _timed(seconds, suite):
    return seconds[suite] <= BUDGET_S[suite], f"{suite} {seconds[suite]:.1f}s/{BUDGET_S[suite]}s"


def test_criterion_1_exact_identities(runs, request):
    _, reports, seconds = runs
    c = _checks(reports["identities"])
    limits = {"partition_of_unity": 1e-12, "x_to_v_transfer": 1e-10,
              "average_decomposition[dirac@1]": 1e-8, "average_decomposition[gauss8]": 1e-8,
              "bony_reconstruction": 1e-10,
              **{f"localization[{n}]": 1e-8 for n in ("A0", "B0", "A_delta", "B_delta")}}
    bad = [n for n, lim in limits.items() if not c[n].value <= lim]
    decomps = [c[n] for n in c if n.startswith("average_decomposition")]
    bad += [d.name for d in decomps if max(d.details["fourier_gap_A"], d.details["fourier_gap_B"]) > 1e-8]
    support = [c[n] for n in c if n.startswith("bony_support[")]
    bad += [s.name for s in support if not s.value <= 1e-10]
    if c["localization[negative_control]"].value <= 1e-2:
        bad.append("negative_control")
    if not c["bony_aliasing_free"].value:
        bad.append("bony_aliasing_free")
    in_time, timing = _timed(seconds, "identities")
    worst = max(c[n].value for n in limits)
    _emit(request, 1, not bad and in_time and len(support) >= 2,
          f"worst identity residual {worst:.2e}, negative control "
          f"{c['localization[negative_control]'].value:.2f}; {timing}" + (f"; failed {bad}" if bad else ""))


def test_criterion_2_dispersive_exponents(runs, request):
    _, reports, seconds = runs
    c = _checks(reports["dispersive"])
    slopes = {p: c[f"slope[p={p}]"].value for p in ("2", "4", "inf")}
    predicted = {"2": -0.5, "4": -0.75, "inf": -1.0}
    ok = all(abs(slopes[p] - predicted[p]) <= 0.15 for p in slopes)
    ok &= c["p=1_ratio_is_one"].value <= 1e-10
    in_time, timing = _timed(seconds, "dispersive")
    _emit(request, 2, ok and in_time,
          "slopes " + ", ".join(f"p={p}: {v:.3f}" for p, v in slopes.items())
          + f"; p=1 deviation {c['p=1_ratio_is_one'].value:.1e}; {timing}")


def test_criterion_3_gain_formula_cross_checks(request):
    start = time.perf_counter()
    ok = predicted_gain(TheoremCase("CLASSICAL", alpha=0, beta=0, a=0, b=0)).s == Fr(1, 2)
    grid = list(itertools.product([Fr(-1, 4), Fr(0), Fr(1, 3), Fr(1), Fr(5, 2)],
                                  [Fr(-1), Fr(0), Fr(1, 4), Fr(1, 2), Fr(2)],
                                  [(Fr(0), Fr(0)), (Fr(1, 2), Fr(-1, 4)), (Fr(1), Fr(1, 2)), (Fr(-1, 2), Fr(1))]))
    r2 = r1 = 0
    for al, be, (a, b) in grid:
        kw = dict(alpha=al, beta=be, a=a, b=b, q=2)
        main = predicted_gain(TheoremCase("MAIN", r=2, p=2, boundary=True, **kw))
        ok &= main.s == predicted_gain(TheoremCase("CLASSICAL", **kw)).s
        r2 += 1
        for p in (Fr(1), Fr(4, 3), Fr(2), Fr(4)):
            kw1 = dict(alpha=al, beta=be, a=a, b=b, p=p, q=1)
            try:
                p2 = predicted_gain(TheoremCase("P2", **kw1))
            except CaseError:
                continue
            ok &= predicted_gain(TheoremCase("MAIN", r=1, **kw1)).s == p2.s
            r1 += 1
    deg = TheoremCase("MAIN2", r0=2, p0=2, q0=2, r1=2, p1=2, q1=2)
    ok &= deg.theta == Fr(1, 2) and predicted_gain(deg).s == Fr(1, 2)
    for al, be, p in ((Fr(1), Fr(0), Fr(2)), (Fr(1, 2), Fr(-1, 3), Fr(4)), (Fr(3), Fr(1, 5), Fr(1))):
        ok &= sum(predicted_gain(TheoremCase("PH", alpha=al, beta=be, p=p)).multiplicative) == 1
    elapsed = time.perf_counter() - start
    _emit(request, 3, ok and r2 == 100 and elapsed < 1.0,
          f"exact agreement on {r2} points at r=2 and {r1} points at r=1; {elapsed:.2f}s/1s")


def test_criterion_4_theorem_sweep(runs, request):
    _, reports, seconds = runs
    rep = reports["verify"]
    cases = rep.extra["cases"]
    expected = {"classical": Fr(3, 4), "p_beta0": 0, "p_beta_half": 0}
    msgs, ok = [], True
    for name, s in expected.items():
        ok &= cases[name]["predicted_s"] == s and len(cases[name]["seeds"]) == 5
        est = [c for c in rep.checks if c.name.startswith(f"estimate[{name},")]
        idx = [c.value for c in est]
        ok &= all(i >= float(s) - 0.2 for i in idx)
        ok &= all(c.details["r2"] >= 0.9 for c in est)
        spread = _checks(rep)[f"ratio_spread[{name}]"].value
        ok &= spread <= 10
        msgs.append(f"{name} s={float(s):g} min index {min(idx):.3f} spread {spread:.2f}")
    in_time, timing = _timed(seconds, "verify")
    _emit(request, 4, ok and in_time, "; ".join(msgs) + f"; {timing}")


def test_criterion_5_counterexamples(runs, request):
    _, reports, seconds = runs
    c = _checks(reports["counterexample"])
    ok = all(c[f"oscillatory_identity[n={n}]"].value <= 1e-8 for n in (4, 8, 16))
    slope = c["average_decay_slope"].value
    ok &= abs(slope + 1) <= 0.2
    masses = c["concentration_mass_stable"].details["masses"]
    ok &= max(masses) <= 1.1 * min(masses)
    exps = []
    for p, r0 in ((1, 2), (1, math.inf), (2, 4)):
        name = f"scaling_exponent[p={p},r0={'inf' if math.isinf(r0) else r0}]"
        target = 1 / p - (0 if math.isinf(r0) else 1 / r0)
        ok &= abs(c[name].value - target) <= 0.05 and c[name].details["unbounded_as_R_grows"]
        exps.append(f"{c[name].value:.3f}/{target:g}")
    in_time, timing = _timed(seconds, "counterexample")
    _emit(request, 5, ok and in_time,
          f"decay slope {slope:.3f}, mass spread {max(masses) / min(masses) - 1:.1e}, "
          f"scaling exponents {', '.join(exps)}; {timing}")


def test_criterion_6_lambda_strip(runs, request):
    _, reports, seconds = runs
    c = _checks(reports["lambda-strip"])
    s0, s1 = c["strip_slope[alpha=0]"].value, c["strip_slope[alpha=1]"].value
    ratio = c["log_corrected_ratio[alpha=0.5]"].value
    ok = abs(s0 + 0.5) <= 0.15 and abs(s1 + 1.0) <= 0.15 and ratio <= 2.0
    in_time, timing = _timed(seconds, "lambda-strip")
    _emit(request, 6, ok and in_time,
          f"slopes {s0:.3f} (alpha=0), {s1:.3f} (alpha=1); log-corrected ratio spread {ratio:.3f}; {timing}")


def test_criterion_7_determinism(runs, request, tmp_path):
    first, _, _ = runs
    status = run("all", str(CONFIG), out=str(tmp_path), stream=io.StringIO())
    a = {p.name: p.read_bytes() for p in sorted(first.iterdir())}
    b = {p.name: p.read_bytes() for p in sorted(tmp_path.iterdir())}
    differing = sorted(n for n in a.keys() | b.keys() if a.get(n) != b.get(n))
    _emit(request, 7, status == 0 and bool(a) and not differing,
          f"{len(a)} report files compared, {len(differing)} differ" + (f": {differing}" if differing else ""))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
