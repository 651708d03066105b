"""Acceptance criteria 1-12, one test each; each prints a PASS/FAIL line.

The lines are also repeated in the pytest terminal summary.
"""

import time

import numpy as np
import pytest

from carleman.derivative import d_alpha
from carleman.gram import KernelCombo, quadratic_form
from carleman.homotopy import (mobius_reduce, normalize_two_kernel, path_A, path_B,
                               two_kernel_norm_path)
from carleman.scan import ScanSpec, run_scan
from carleman.suites import run_suite

from conftest import ACCEPTANCE_LINES


def report(n: int, passed: bool, detail: str):
    ACCEPTANCE_LINES.append((n, bool(passed), detail))
    print(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, f"criterion {n} failed: {detail}"


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - start


def combo_of(rec) -> KernelCombo:
    return KernelCombo(rec.alpha, np.real(rec.w), rec.c)


def test_criterion_01_flatness():
    res = run_suite("flatness", tolerance=1e-10)
    report(1, res.passed and res.cases == 25 and res.seconds < 1.0,
           f"max|dN/dalpha| = {res.max_error:.2e} <= 1e-10, {res.seconds:.2f}s < 1s")


def test_criterion_02_radial_moments():
    res = run_suite("radial_moments", tolerance=1e-8)
    report(2, res.passed and res.seconds < 1.0,
           f"max rel err = {res.max_error:.2e} <= 1e-8, {res.seconds:.2f}s < 1s")


def test_criterion_03_oracle_equivalence():
    res = run_suite("oracle_equivalence", samples=50)
    d = res.details
    ok = (d["I_f_rel"] <= 1e-6 and d["II_III_rel"] <= 1e-8 and d["N_rel"] <= 1e-8
          and res.seconds < 60)
    report(3, ok, f"I_f {d['I_f_rel']:.1e} <= 1e-6, II/III {d['II_III_rel']:.1e} <= 1e-8, "
                  f"N {d['N_rel']:.1e} <= 1e-8, {res.seconds:.1f}s < 60s")


def test_criterion_04_gradient():
    res = run_suite("gradient", samples=20, tolerance=1e-4)
    report(4, res.passed and res.seconds < 60,
           f"max rel err = {res.max_error:.2e} <= 1e-4 (h = 1e-3), {res.seconds:.1f}s < 60s")


def test_criterion_05_theorem31_scan():
    res, secs = timed(run_scan, ScanSpec("Theorem31", samples=1000, k_range=(1, 5)))
    ok = res.positive_count == 0 and res.failures == 0 and secs < 5
    report(5, ok, f"{res.positive_count} positive of 1000, max D = {res.max_d:.2e}, "
                  f"{secs:.2f}s < 5s")


def test_criterion_06_theorem32_scan_and_path_a():
    res = run_scan(ScanSpec("Theorem32", samples=1000))
    bad_paths = 0
    worst_d0 = 0.0
    traced = 0
    for rec in res.records:
        if rec.d is None or traced == 100:
            continue
        trace = path_A(mobius_reduce(combo_of(rec)))
        worst_d0 = max(worst_d0, abs(trace.values[0]))
        bad_paths += not trace.monotone_nonincreasing
        traced += 1
    ok = res.positive_count == 0 and traced == 100 and bad_paths == 0 and worst_d0 <= 1e-10
    report(6, ok, f"{res.positive_count} positive of 1000; path_A: {bad_paths}/100 "
                  f"non-monotone, max|D_0| = {worst_d0:.1e}")


def test_criterion_07_theorem34_scan_and_path_b():
    res = run_scan(ScanSpec("Theorem34", samples=1000))
    worst = res.max_d
    rng = np.random.default_rng(34)
    eq = 0.0
    for _ in range(100):
        alpha = float(rng.uniform(0.2, 6))
        w = np.sort(rng.uniform(-0.9, 0.9, 2))
        # Re c > 0 keeps the single-kernel values in H (Lambda)
        c = rng.uniform(0.1, 2, 2) + 1j * rng.uniform(-2, 2, 2)
        cases = [KernelCombo(alpha, w, [0.0, c[1]]), KernelCombo(alpha, w, [c[0], 0.0]),
                 KernelCombo(alpha, [w[0], w[0]], c.real * rng.choice([-1, 1], 2))]
        eq = max(eq, *(abs(d_alpha(x)) for x in cases))
    bad_paths = 0
    worst_d1 = 0.0
    for rec in res.records:
        trace = path_B(combo_of(rec), np.linspace(0, 1, 51))
        bad_paths += not trace.monotone_nondecreasing
        worst_d1 = max(worst_d1, abs(trace.values[-1]))
    ok = (res.failures == 0 and worst <= 1e-10 and eq <= 1e-10 and bad_paths == 0
          and worst_d1 <= 1e-10)
    report(7, ok, f"max D = {worst:.1e} <= 1e-10; equality cases max|D| = {eq:.1e}; "
                  f"path_B {bad_paths}/1000 non-monotone, max|D_1| = {worst_d1:.1e}")


def test_criterion_08_mobius():
    res = run_suite("mobius", samples=200, tolerance=1e-8)
    report(8, res.passed, f"max |D - D_reduced|/(1+|D|) = {res.max_error:.1e} <= 1e-8")


def _two_kernel_instance(rng):
    theta = np.exp(2j * np.pi * np.arange(1024) / 1024)
    while True:
        w = 0.8 * np.sqrt(rng.random(2)) * np.exp(2j * np.pi * rng.random(2))
        c = np.array([1.0, rng.uniform(0.05, 0.5) * np.exp(2j * np.pi * rng.random())])
        combo = KernelCombo(3.0, w, c)
        if np.min(np.abs(combo(theta))) > 1e-3 and np.min(combo(theta).real) > 0:
            return combo


def test_criterion_09_norm_path():
    rng = np.random.default_rng(41)
    grid = np.linspace(1.0, 3.0, 81)
    bad = 0
    end_err = 0.0
    for _ in range(100):
        combo = _two_kernel_instance(rng)
        trace = two_kernel_norm_path(normalize_two_kernel(combo), grid, slack=1e-8)
        bad += not trace.monotone_nonincreasing
        end_err = max(end_err, abs(trace.values[-1] / quadratic_form(combo) ** (1 / 3) - 1))
    spread = 0.0
    for w in (0.0, 0.4, -0.3 + 0.5j):
        for combo in (KernelCombo(3.0, [w, 0.2], [1.5, 0.0]),
                      KernelCombo(3.0, [w, w], [1.0, 0.5 + 0.5j])):
            v = two_kernel_norm_path(normalize_two_kernel(combo), grid).values
            spread = max(spread, float(v.max() - v.min()))
    ok = bad == 0 and spread <= 1e-10 and end_err <= 1e-10
    report(9, ok, f"{bad}/100 non-monotone (slack 1e-8); single-kernel spread "
                  f"{spread:.1e} <= 1e-10; endpoint rel err {end_err:.1e}")


def test_criterion_10_series_identity():
    res = run_suite("series_identity", samples=20, tolerance=1e-10)
    d = res.details
    ok = d["random_max"] <= 1e-10 and d["hand_case"] <= 1e-14 and res.seconds < 30
    report(10, ok, f"random max gap {d['random_max']:.1e} <= 1e-10; hand case "
                   f"{d['hand_case']:.1e} <= 1e-14; {res.seconds:.2f}s < 30s")


def test_criterion_11_counterexample():
    res = run_suite("counterexample", tolerance=1e-5)
    d = res.details
    ok = d["min_eig_minus_B"] <= -1e-4 and abs(d["d_alpha"] + 1.163e-3) <= 1e-5 \
        and d["d_alpha"] <= 0
    report(11, ok, f"min eig(-B) = {d['min_eig_minus_B']:.3e} <= -1e-4; "
                   f"D = {d['d_alpha']:.4e} (target -1.163e-3 +- 1e-5)")


@pytest.fixture(scope="module")
def conjecture_scans():
    return {t: run_scan(ScanSpec(t, samples=10_000, seed=0))
            for t in ("Conjecture4", "Conjecture6", "Question7")}


def test_criterion_12_conjecture_scans(conjecture_scans):
    parts = []
    for target, res in conjecture_scans.items():
        part = f"{target}: {res.positive_count} positive / 10000"
        if res.positive:
            first = min(res.positive, key=lambda r: r.index)
            part += f" (first: seed 0 index {first.index}, D = {first.d:.3e})"
        if res.failures:
            part += f", {res.failures} flagged evaluation failures"
        parts.append(part)
    ok = all(res.positive_count == 0 for res in conjecture_scans.values())
    report(12, ok, "; ".join(parts))
