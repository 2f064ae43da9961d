import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from hkform.errors import DivergentIntegral, DomainError
from hkform.fields import FieldData
from hkform.lattice import LatticeSpec, exact_trace, isolate_second_order
from hkform.trace import SpectralFunction, coincidence_kernel, laplace_trace, omega_square_modes, tr_heat_kernel
from oracles import closed_form


@pytest.mark.parametrize("d", [1, 2, 3])
def test_zero_fields(d):
    res = tr_heat_kernel(FieldData.zero(d, 2.0, bundle_dim=2), 0.3)
    assert res.order0 == 2 * 2.0 ** d
    assert res.order1 == res.order2_U == res.order2_Omega == 0.0
    assert res.total == pytest.approx(2 * 2.0 ** d * (4 * math.pi * 0.3) ** (-d / 2), rel=1e-15)


@given(u=st.floats(-3.0, 3.0), s=st.floats(0.01, 2.0))
def test_constant_u_reproduces_exponential_to_second_order(u, s):
    res = tr_heat_kernel(FieldData.constant_u(2, 1.0, u), s)
    assert res.order1 == pytest.approx(-s * u, abs=1e-15)
    assert res.order2_U == pytest.approx(s * s * u * u / 2, rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("x", [0.2, 3.0, 80.0])
def test_single_mode_u(x):
    length, n, eps = 2.0, (3,), 0.05
    f = FieldData.single_mode_u(1, length, n, eps, bundle_dim=3)
    p2 = float(f.momentum(n) @ f.momentum(n))
    s = x / p2
    res = tr_heat_kernel(f, s)
    expected = 3 * 2 * s * s * length * eps ** 2 * float(closed_form("u", x))
    assert res.order2_U == pytest.approx(expected, rel=1e-12)
    assert res.order1 == 0.0


def test_single_mode_connection():
    f = FieldData.single_mode_theta(2, 1.0, 0, (0, 1), 0.1)
    p2 = float(f.momentum((0, 1)) @ f.momentum((0, 1)))
    sq = omega_square_modes(f)
    assert sq[(0, 1)] == pytest.approx(-2 * p2 * 0.01, rel=1e-14)
    s = 0.02
    res = tr_heat_kernel(f, s)
    expected = -4 * p2 * 0.01 * s * s * float(closed_form("omega", s * p2))
    assert res.order2_Omega == pytest.approx(expected, rel=1e-12)
    assert res.order2_Omega < 0


def test_longitudinal_connection_is_pure_gauge():
    # theta parallel to its momentum has zero field strength
    f = FieldData.single_mode_theta(2, 1.0, 1, (0, 2), 0.3)
    assert tr_heat_kernel(f, 0.01).order2_Omega == 0.0


def test_zero_mode_shift_only_moves_first_order():
    base = FieldData.single_mode_u(1, 1.0, (2,), 0.1)
    shifted = FieldData(1, 1.0, {**base.u_modes, (0,): 0.0})
    a, b = tr_heat_kernel(base, 0.02), tr_heat_kernel(shifted, 0.02)
    assert a.order2_U == b.order2_U


def test_coincidence_kernel_against_lattice_diagonal():
    s, eps = 0.004, 1e-3
    spec = LatticeSpec(1, 256)
    fields = FieldData.single_mode_u(1, 1.0, (2,), eps)
    zero = FieldData.zero(1, 1.0)
    x = spec.sites()
    lattice = exact_trace(spec, fields, s, diagonal=True).diagonal - exact_trace(spec, zero, s, diagonal=True).diagonal
    continuum = coincidence_kernel(fields, s, x) - coincidence_kernel(zero, s, x)
    assert np.max(np.abs(lattice - continuum)) < 1e-2 * np.max(np.abs(continuum))


def test_coincidence_kernel_shapes():
    f = FieldData.single_mode_u(2, 1.0, (1, 0), 0.1)
    assert isinstance(coincidence_kernel(f, 0.1, [0.0, 0.0]), float)
    assert coincidence_kernel(f, 0.1, np.zeros((5, 2))).shape == (5,)
    zero = FieldData.zero(1, 1.0, bundle_dim=2)
    assert coincidence_kernel(zero, 0.25, 0.3) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-15)


def test_laplace_massive_free():
    m2 = 4.0
    assert laplace_trace(FieldData.zero(1, 1.0), SpectralFunction.massive_resolvent(m2)) == pytest.approx(0.25, rel=1e-10)
    with pytest.raises(DivergentIntegral):
        laplace_trace(FieldData.zero(2, 1.0), SpectralFunction.massive_resolvent(m2))
    s_min = 1e-3
    got = laplace_trace(FieldData.zero(2, 1.0), SpectralFunction.massive_resolvent(m2, s_min=s_min))
    assert got == pytest.approx(special.exp1(m2 * s_min) / (4 * math.pi), rel=1e-9)


def test_laplace_heat_and_custom():
    f = FieldData.single_mode_u(1, 1.0, (1,), 0.1)
    assert laplace_trace(f, SpectralFunction.heat_kernel(0.05)) == tr_heat_kernel(f, 0.05).total
    m2 = 9.0
    custom = SpectralFunction.custom(lambda s: math.exp(-m2 * s))
    assert laplace_trace(f, custom) == pytest.approx(laplace_trace(f, SpectralFunction.massive_resolvent(m2)), rel=1e-9)
    with pytest.raises(DivergentIntegral):
        laplace_trace(f, SpectralFunction.custom(lambda s: 1.0))
    with pytest.raises(DomainError):
        SpectralFunction("heat", -1.0)


def test_massive_resolvent_second_order_against_lattice():
    # m L >> 1 keeps the periodic images negligible
    m2 = 300.0
    fields = FieldData.single_mode_u(1, 1.0, (3,), 1.0)
    eps = 1e-2
    h = SpectralFunction.massive_resolvent(m2)
    continuum = laplace_trace(fields.scaled(eps), h) - laplace_trace(FieldData.zero(1, 1.0), h)
    lattice = isolate_second_order(LatticeSpec(1, 512), fields, 1.0, eps, func=lambda lam: 1.0 / (lam + m2))
    assert lattice == pytest.approx(continuum, rel=1e-2)


def test_errors():
    with pytest.raises(DomainError):
        tr_heat_kernel(FieldData.zero(1, 1.0), 0.0)
    with pytest.raises(DomainError):
        coincidence_kernel(FieldData.zero(1, 1.0), -1.0, 0.0)
