"""Acceptance criteria 1 to 8, one pass/fail line each (printed in the terminal summary)."""

import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from hkform import basis_transform as bt
from hkform.diagrams import extract_form_factors, momentum_for, npoint
from hkform.fields import FieldData
from hkform.form_factors import evaluate, series
from hkform.lattice import LatticeSpec, exact_trace, in_scaling_window, second_order_sweep
from hkform.resolvent import Contour, contour_exp, omega_via_resolvent, resolvent_aa_parts
from hkform.trace import tr_heat_kernel
from hkform.verification import lattice_amplitude, verify_bases, verify_projectors

RESULTS: dict = {}


def record(key, ok: bool, detail: str):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[key] = line
    print(line)
    return ok


def grid(lo, hi, n):
    return np.logspace(math.log10(lo), math.log10(hi), n)


def test_criterion_1_constant_table():
    start = time.perf_counter()
    expected = {"ric": 1 / 60, "r": 1 / 120, "ru": -1 / 6, "u": 1 / 2, "omega": 1 / 12}
    err = max(abs(evaluate(k, 0.0) - v) for k, v in expected.items())
    elapsed = time.perf_counter() - start
    ok = err <= 1e-12 and elapsed < 1.0
    assert record("1", ok, f"max |f(0) - table| = {err:.2e}, {elapsed:.3f} s")


SMALL_X = {
    "ric": (F(1, 60), F(-1, 840), F(1, 15120)),
    "r": (F(1, 120), F(-1, 336), F(11, 30240)),
    "ru": (F(-1, 6), F(1, 30), F(-1, 280)),
    "u": (F(1, 2), F(-1, 12), F(1, 120)),
    "omega": (F(1, 12), F(-1, 120), F(1, 1680)),
}
LARGE_X = {
    "ric": (-1, (F(1, 6), F(-1))),
    "r": (-1, (F(-1, 12), F(1, 2))),
    "ru": (-2, (F(-2), F(-8))),
    "u": (-1, (F(1), F(2))),
    "omega": (-1, (F(1, 2), F(-1, 2))),
}
# the printed x^-2 coefficient of f_Omega disagrees with its own closed form
KNOWN_MISMATCH = ("omega", "large_x", 1)


def _series_mismatches():
    bad = []
    for kind, coeffs in SMALL_X.items():
        ser = series(kind, "small_x", 3)
        bad += [(kind, "small_x", i) for i, c in enumerate(coeffs) if ser.leading_power != 0 or ser.coefficients[i] != c]
    for kind, (lead, coeffs) in LARGE_X.items():
        ser = series(kind, "large_x", 2)
        bad += [(kind, "large_x", i) for i, c in enumerate(coeffs)
                if ser.leading_power != lead or ser.coefficients[i] != c]
    r2d = series("r2d", "large_x", 2)
    if (r2d.leading_power, r2d.coefficients) != (-3, (F(2), F(12))):
        bad.append(("r2d", "large_x", 0))
    r, ric = series("r", "large_x", 2), series("ric", "large_x", 2)
    if any(r.coefficients[i] + ric.coefficients[i] / 2 != 0 for i in range(2)):
        bad.append(("r2d", "vanishing", 0))
    return bad


def test_criterion_2_series():
    bad = _series_mismatches()
    total = sum(len(c) for c in SMALL_X.values()) + sum(len(c) for _, c in LARGE_X.values()) + 2
    omega = series("omega", "large_x", 2).coefficients
    record("2", not bad, f"{total - len(bad)}/{total} printed coefficients match exactly; "
           f"mismatches {bad}; f_Omega large-x from the closed form is {omega[0]}/x + ({omega[1]})/x^2")
    # every coefficient other than the analyzed one must match
    assert [m for m in bad if m != KNOWN_MISMATCH] == []


@pytest.mark.xfail(strict=True, reason="printed -1/(2x^2) contradicts f_Omega = (1 - f)/(2x), which gives -1/x^2")
def test_criterion_2_printed_omega_large_x():
    assert series("omega", "large_x", 2).coefficients == LARGE_X["omega"][1]


def test_criterion_3_diagrams():
    start = time.perf_counter()
    xs = grid(1e-2, 1e2, 20)
    err = 0.0
    for x in xs:
        for channel, key in [("TrUU", "u"), ("TrAA", "omega"), ("TrhU", "ru"), ("Trhh", "ric"), ("Trhh", "r"),
                             ("K_U", "gu")]:
            got = extract_form_factors(channel, x, 4)[key]
            err = max(err, abs(got - evaluate(key, x)) / max(1.0, abs(evaluate(key, x))))
        err = max(err, abs(extract_form_factors("K_U", x, 4)["gu"] + evaluate("basic", x)))
    from hkform.diagrams import extract_constants
    gr0 = extract_constants(4).gR0
    err_g = abs(gr0 - 1 / 6)
    spread = 0.0
    for x in xs:
        for channel, key in [("TrUU", "u"), ("TrAA", "omega"), ("TrhU", "ru"), ("K_U", "gu"), ("K_h", "gr")]:
            vals = [extract_form_factors(channel, x, d)[key] for d in (3, 4, 6)]
            spread = max(spread, (max(vals) - min(vals)) / max(1.0, abs(vals[1])))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-8 and err_g <= 1e-8 and spread <= 1e-8 and elapsed < 30
    assert record("3", ok, f"max extraction error {err:.2e}, |g_R(0) - 1/6| = {err_g:.2e}, "
                  f"d-spread {spread:.2e}, {elapsed:.1f} s")


def test_criterion_4_transversality():
    worst_l, worst_ah = 0.0, 0.0
    for d in (3, 4, 6):
        for s in (0.5, 1.0, 2.0):
            for x in grid(1e-2, 1e2, 8):
                p = momentum_for(x, s, d)
                worst_l = max(worst_l, abs(npoint("TrAA", s, p).pl_coeff))
                worst_ah = max(worst_ah, float(np.max(np.abs(npoint("TrAh", s, p).tensor))))
    ok = worst_l <= 1e-10 and worst_ah <= 1e-14
    assert record("4", ok, f"max TrAA longitudinal {worst_l:.2e}, max |TrAh| {worst_ah:.2e}")


def test_criterion_5_projectors():
    report = verify_projectors(d_values=(3, 4, 6), trials=100, tol=1e-12)
    failed = [c["name"] for c in report["checks"] if c["status"] == "fail"]
    worst = max(c["measured"] for c in report["checks"])
    assert record("5", report["pass"], f"{len(report['checks'])} checks, worst {worst:.2e}, failed {failed}")


def test_criterion_6_resolvent():
    start = time.perf_counter()
    exp_err = max(abs(contour_exp(x, s, Contour(x, 1.0)) - math.exp(-s * x))
                  for x in (0.0, 0.5, 2.0, 5.0) for s in (0.1, 1.0, 3.0))
    points = (0.1, 1.0, 10.0, 100.0)
    omega_err = max(abs(omega_via_resolvent(x) - evaluate("omega", x)) for x in points)
    longi = max(abs(resolvent_aa_parts(x)["total_L"]) for x in points)
    elapsed = time.perf_counter() - start
    ok = exp_err <= 1e-12 and omega_err <= 1e-6 and longi <= 1e-8 and elapsed < 10
    assert record("6", ok, f"contour {exp_err:.2e}, f_Omega {omega_err:.2e}, longitudinal {longi:.2e}, "
                  f"{elapsed:.2f} s")


def _ratio(spec, fields, s):
    amp = lattice_amplitude(fields, s)
    isolated = second_order_sweep(spec, fields, [s], amp)[0]
    res = tr_heat_kernel(fields.scaled(amp), s)
    return isolated / ((res.order2_U + res.order2_Omega) * (4 * math.pi * s) ** (-fields.d / 2))


@pytest.mark.slow
def test_criterion_7_lattice():
    details, ok = [], True
    start = time.perf_counter()
    spec = LatticeSpec(1, 512)
    fields = FieldData.single_mode_u(1, 1.0, (4,), 1.0)
    p2 = float(fields.momentum((4,)) @ fields.momentum((4,)))
    for x in (0.25, 1.0, 4.0):
        s = x / p2
        assert in_scaling_window(spec, s)
        err = abs(_ratio(spec, fields, s) - 1)
        ok &= err <= 0.01
        details.append(f"d=1 sp^2={x}: {err:.2e}")
    t1 = time.perf_counter() - start
    start = time.perf_counter()
    spec2 = LatticeSpec(2, 48)
    theta = FieldData.single_mode_theta(2, 1.0, 0, (0, 1), 1.0)
    s = 0.02
    assert in_scaling_window(spec2, s)
    err2 = abs(_ratio(spec2, theta, s) - 1)
    t2 = time.perf_counter() - start
    ok &= err2 <= 0.03 and t1 < 120 and t2 < 120
    details.append(f"d=2 s={s}: {err2:.2e}")
    assert record("7", ok, ", ".join(details) + f"; {t1:.1f} s and {t2:.1f} s")


def test_criterion_8_identities():
    spec = LatticeSpec(1, 64)
    u, s = 2.5, 0.01
    ratio = exact_trace(spec, FieldData.constant_u(1, 1.0, u), s).trace / exact_trace(spec, FieldData.zero(1, 1.0), s).trace
    exp_err = abs(ratio / math.exp(-s * u) - 1)
    res = tr_heat_kernel(FieldData.constant_u(1, 1.0, u), s)
    fu0 = abs(evaluate("u", 0.0) - 0.5) + abs(res.order2_U - (s * u) ** 2 / 2)
    xs = [0.0] + list(grid(1e-3, 1e3, 40))
    r2d = max(abs(evaluate("r2d", x) - evaluate("r", x) - evaluate("ric", x) / 2) for x in xs)
    report = verify_bases(d_values=(4, 5, 6), tol=1e-14)
    trips = max(c["measured"] for c in report["checks"] if "round trip" in c["name"])
    ok = exp_err <= 1e-13 and fu0 <= 1e-15 and r2d <= 1e-12 and trips <= 1e-14
    assert record("8", ok, f"lattice e^(-su) {exp_err:.2e}, f_U(0) {fu0:.1e}, r2d identity {r2d:.2e}, "
                  f"round trips {trips:.2e}")
