import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hkform.errors import DomainError, UnsupportedOrder
from hkform.form_factors import (
    EvalConfig,
    FormFactorKind,
    Tag,
    basic_f,
    basic_f_quadrature,
    evaluate,
    large_x_coefficient,
    laurent_combination,
    series,
    small_x_coefficient,
)

from oracles import closed_form, f_dawson
from oracles import f as f_mp

GRID = [0.0, 1e-8, 1e-3, 0.1, 0.4999, 0.5, 0.5001, 1.0, 3.0, 10.0, 40.0, 100.0,
        149.9, 150.1, 300.0, 1e3, 1e5]
KINDS = ["basic", "ric", "r", "ru", "u", "omega", "r2d", "gu", "gr"]


@pytest.mark.parametrize("x", GRID)
def test_basic_f_against_two_oracles(x):
    got = basic_f(x)
    assert abs(got - float(f_mp(x))) <= 4e-15 * got
    assert abs(got - float(f_dawson(x))) <= 4e-15 * got


# the printed combinations cancel at large x: f_R2d ~ 2/x^3 is built from
# terms of size f/32, so its relative error grows like x^2 times that of f
KIND_TOL = {"ru": 5e-13, "gr": 5e-13, "r2d": 5e-12}


@pytest.mark.parametrize("kind", KINDS)
def test_derived_kinds_against_mpmath(kind):
    tol = KIND_TOL.get(kind, 1e-13)
    for x in GRID[1:]:
        ref = float(closed_form(kind, x))
        assert abs(evaluate(kind, x) - ref) <= tol * abs(ref), (kind, x)


def test_constant_table_exact():
    expected = {"ric": 1 / 60, "r": 1 / 120, "ru": -1 / 6, "u": 1 / 2, "omega": 1 / 12,
                "gu": -1.0, "gr": 1 / 6, "basic": 1.0}
    for kind, value in expected.items():
        assert abs(evaluate(kind, 0.0) - value) <= 1e-15


def test_basic_f_at_one_frozen():
    # frozen from the 40-digit quadrature oracle
    assert abs(basic_f(1.0) - 0.84887276700404459) <= 1e-15
    assert abs(basic_f_quadrature(1.0, 1e-13) - float(f_mp(1.0))) <= 1e-13


def test_weyl_kinds_follow_linear_map():
    for d in (4, 5, 7):
        for x in (0.0, 0.3, 2.0, 50.0, 500.0):
            ric, r = evaluate("ric", x), evaluate("r", x)
            assert math.isclose(evaluate(f"c({d})", x), (d - 2) / (4 * (d - 3)) * ric, rel_tol=1e-14)
            assert math.isclose(evaluate(f"rbis({d})", x), d / (4 * (d - 1)) * ric + r, rel_tol=1e-14)
    # the linear map fixes the short-time values (d-2)/(240(d-3)) and (3d-2)/(240(d-1))
    assert abs(evaluate("c(4)", 0.0) - 1 / 120) <= 1e-16
    assert abs(evaluate("rbis(4)", 0.0) - 1 / 72) <= 1e-16


def test_bv_kinds():
    for x in (0.0, 0.7, 20.0, 400.0):
        u, ru, r = evaluate("u", x), evaluate("ru", x), evaluate("r", x)
        assert evaluate("bv1", x) == evaluate("ric", x)
        assert math.isclose(evaluate("bv2", x), r + u / 36 + ru / 6, rel_tol=1e-13, abs_tol=1e-17)
        assert math.isclose(evaluate("bv3", x), -u / 3 - ru, rel_tol=1e-12, abs_tol=1e-16)
        assert evaluate("bv4", x) == u
        assert evaluate("bv5", x) == evaluate("omega", x)
    assert abs(evaluate("bv3", 0.0)) <= 1e-16


def test_small_x_series_printed_coefficients():
    F = Fraction
    printed = {
        "basic": (F(1), F(-1, 6), F(1, 60)),
        "ric": (F(1, 60), F(-1, 840), F(1, 15120)),
        "r": (F(1, 120), F(-1, 336), F(11, 30240)),
        "ru": (F(-1, 6), F(1, 30), F(-1, 280)),
        "u": (F(1, 2), F(-1, 12), F(1, 120)),
        "omega": (F(1, 12), F(-1, 120), F(1, 1680)),
    }
    for kind, coeffs in printed.items():
        ser = series(kind, "small_x", 3)
        assert ser.leading_power == 0
        assert ser.coefficients == coeffs


def test_large_x_series_printed_coefficients():
    F = Fraction
    printed = {
        "basic": (-1, (F(2), F(4))),
        "ric": (-1, (F(1, 6), F(-1))),
        "r": (-1, (F(-1, 12), F(1, 2))),
        "ru": (-2, (F(-2), F(-8))),
        "u": (-1, (F(1), F(2))),
        "r2d": (-3, (F(2), F(12))),
    }
    for kind, (lead, coeffs) in printed.items():
        ser = series(kind, "large_x", 2)
        assert (ser.leading_power, ser.coefficients) == (lead, coeffs), kind


def test_omega_large_x_follows_closed_form():
    # f_Omega = 1/(2x) - f/(2x) with f = 2/x + 4/x^2 + ... gives 1/(2x) - 1/x^2;
    # a quoted -1/(2x^2) second term is inconsistent with that closed form
    ser = series("omega", "large_x", 3)
    assert (ser.leading_power, ser.coefficients) == (-1, (Fraction(1, 2), Fraction(-1), Fraction(-2)))
    x = 10 ** 4
    second = (closed_form("omega", x) - 0.5 / x) * x ** 2
    assert abs(float(second) + 1) < 1e-3


def test_r2d_has_no_first_two_inverse_powers():
    a, b = laurent_combination(FormFactorKind(Tag.R2D))
    ser = series("r2d", "large_x", 4)
    assert ser.leading_power == -3
    ric = series("ric", "large_x", 4)
    r = series("r", "large_x", 4)
    # combine the x^-1 and x^-2 terms of f_R + f_Ric/2
    assert r.coefficients[0] + ric.coefficients[0] / 2 == 0
    assert r.coefficients[1] + ric.coefficients[1] / 2 == 0


def test_coincidence_series():
    assert series("gu", "small_x", 3).coefficients == (-1, Fraction(1, 6), Fraction(-1, 60))
    assert series("gr", "small_x", 3).coefficients == (Fraction(1, 6), Fraction(-1, 30), Fraction(1, 280))


def test_general_coefficient_rules():
    for n in range(12):
        assert small_x_coefficient(n) == Fraction((-1) ** n * math.factorial(n), math.factorial(2 * n + 1))
    basic = series("basic", "large_x", 10)
    assert basic.coefficients[2] == 24
    for k, c in enumerate(basic.coefficients):
        assert c == large_x_coefficient(k)


def test_third_large_x_coefficient_from_quadrature_fit():
    # fit (f - 2/x - 4/x^2) x^3 at growing x; the limit is 24
    est = [float((f_mp(x) - 2 / x - 4 / x ** 2) * x ** 3) for x in (400, 800, 1600)]
    # remove the O(1/x) tail with Richardson steps
    r1 = [2 * est[i + 1] - est[i] for i in range(2)]
    r2 = (4 * r1[1] - r1[0]) / 3
    assert abs(r2 - 24) < 1e-3


def test_series_exact_then_float():
    assert all(isinstance(c, Fraction) for c in series("ric", "small_x", 20).coefficients)
    assert all(isinstance(c, float) for c in series("ric", "small_x", 25).coefficients)
    with pytest.raises(UnsupportedOrder):
        series("ric", "small_x", 41)
    with pytest.raises(UnsupportedOrder):
        series("ric", "large_x", 0)


def test_pole_cancellation_is_exact():
    for tag in (Tag.RIC, Tag.R, Tag.RU, Tag.OMEGA, Tag.R2D, Tag.GR):
        ser = series(tag, "small_x", 20)
        assert ser.leading_power == 0
        # the Taylor series reproduces the closed form well inside the cut
        x = 0.3
        assert abs(ser(x) - float(closed_form(tag.value, x))) <= 1e-15


@pytest.mark.parametrize("kind", KINDS)
def test_branch_consistency_at_cuts(kind):
    cfg = EvalConfig()
    tol = 10 * cfg.quad_rel_tol
    # evaluate the same x through the series branch and the quadrature branch
    series_small = EvalConfig(small_x_cut=cfg.small_x_cut * 1.01, large_x_cut=cfg.large_x_cut)
    quad_small = EvalConfig(small_x_cut=cfg.small_x_cut * 0.99, large_x_cut=cfg.large_x_cut)
    series_large = EvalConfig(small_x_cut=cfg.small_x_cut, large_x_cut=cfg.large_x_cut * 0.99)
    quad_large = EvalConfig(small_x_cut=cfg.small_x_cut, large_x_cut=cfg.large_x_cut * 1.01)
    x = cfg.small_x_cut
    a, b = evaluate(kind, x, series_small), evaluate(kind, x, quad_small)
    assert abs(a - b) <= tol * abs(b)
    x = cfg.large_x_cut
    a, b = evaluate(kind, x, series_large), evaluate(kind, x, quad_large)
    assert abs(a - b) <= max(tol, KIND_TOL.get(kind, 0.0)) * abs(b)


def test_config_validation_and_env(monkeypatch):
    with pytest.raises(DomainError):
        EvalConfig(small_x_cut=2.0, large_x_cut=1.0)
    with pytest.raises(DomainError):
        EvalConfig(quad_rel_tol=1e-3)
    with pytest.raises(DomainError):
        EvalConfig(series_order=41)
    monkeypatch.setenv("HK_QUAD_TOL", "1e-10")
    assert EvalConfig.from_env().quad_rel_tol == 1e-10
    monkeypatch.setenv("HK_QUAD_TOL", "nope")
    with pytest.raises(DomainError):
        EvalConfig.from_env()


def test_custom_cuts_agree():
    cfg = EvalConfig(small_x_cut=0.1, large_x_cut=400.0)
    for x in (0.2, 0.45, 200.0, 350.0):
        assert math.isclose(evaluate("omega", x, cfg), evaluate("omega", x), rel_tol=1e-13)


def test_domain_errors():
    with pytest.raises(DomainError):
        basic_f(-1.0)
    with pytest.raises(DomainError):
        evaluate("c(3)", 1.0)
    with pytest.raises(DomainError):
        FormFactorKind.parse("c")
    with pytest.raises(DomainError):
        FormFactorKind.parse("nonsense")


def test_kind_parsing():
    assert FormFactorKind.parse("C(4)").label == "c(4)"
    assert FormFactorKind.parse("rbis:6") == FormFactorKind(Tag.RBIS, 6)
    assert FormFactorKind.parse("f").tag is Tag.BASIC
    assert FormFactorKind.parse("ric", d=5).d is None


def test_array_input():
    xs = np.array([[0.0, 1.0], [10.0, 1000.0]])
    got = evaluate("ru", xs)
    assert got.shape == xs.shape
    assert got[1, 0] == evaluate("ru", 10.0)


@given(st.floats(min_value=0.0, max_value=1e4), st.floats(min_value=0.0, max_value=1e4))
def test_basic_f_bounds_and_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    f_lo, f_hi = basic_f(lo), basic_f(hi)
    assert 0.0 < f_hi <= 1.0
    assert f_hi <= f_lo * (1 + 1e-15)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_weighted_moment_identity(x):
    # (1/2) int (1 - 2 xi)^2 exp(-x xi(1 - xi)) = -(f - 1)/x, which is 2 f_Omega
    from hkform.quadrature import adaptive_gauss_legendre

    lhs = 0.5 * float(adaptive_gauss_legendre(lambda t: (1 - 2 * t) ** 2 * np.exp(-x * t * (1 - t)), 0.0, 1.0))
    assert math.isclose(lhs, 2 * evaluate("omega", x), rel_tol=1e-12)


@given(st.floats(min_value=0.0, max_value=1e4))
def test_two_dimensional_combination(x):
    assert abs(evaluate("r2d", x) - evaluate("r", x) - evaluate("ric", x) / 2) <= 1e-12 * max(abs(evaluate("r", x)), 1e-3)


@given(st.floats(min_value=0.0, max_value=1e4))
def test_u_is_half_f_and_gu_is_minus_f(x):
    assert evaluate("u", x) == basic_f(x) / 2
    assert evaluate("gu", x) == -basic_f(x)
