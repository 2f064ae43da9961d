"""Second-order non-local heat trace and coincidence-limit kernel for field data.

With flat metric the curvature terms vanish and the trace reduces to

    Tr exp(-s Delta) = (4 pi s)^{-d/2} [ N V - s N V U_0
                       + s^2 V N sum_p |U_p|^2 f_U(s p^2)
                       + s^2 V N sum_p f_Omega(s p^2) Omega_p . Omega_{-p} ]

for Delta = -D^2 + U on a box of volume V, with N the bundle dimension and
U proportional to the identity on the fiber. For A = i theta the linearized
field strength is Omega = i (d theta - d theta), so its square is negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DivergentIntegral, DomainError
from .fields import FieldData
from .form_factors import EvalConfig, evaluate

__all__ = [
    "TraceExpansionResult",
    "SpectralFunction",
    "tr_heat_kernel",
    "coincidence_kernel",
    "omega_square_modes",
    "laplace_trace",
]


@dataclass(frozen=True)
class TraceExpansionResult:
    """Term-by-term heat trace; ``total`` includes the (4 pi s)^{-d/2} prefactor.

    The curvature terms are identically zero on a flat box and are kept for
    a stable schema.
    """

    s: float
    order0: float
    order1: float
    order2_U: float
    order2_Omega: float
    total: float
    order2_R: float = 0.0
    order2_Ric: float = 0.0
    order2_RU: float = 0.0


def omega_square_modes(fields: FieldData) -> dict:
    """Map n -> sum_{mu nu} Omega_{mu nu}(-p) Omega_{mu nu}(p) for each connection mode."""
    out = {}
    for n, theta in fields.theta_modes().items():
        p = fields.momentum(n)
        f = np.outer(p, theta) - np.outer(theta, p)
        # Omega(p) = -(p theta - theta p); Omega(-p) = conj of that by reality
        out[n] = -float(np.sum(np.abs(f) ** 2))
    return out


def tr_heat_kernel(fields: FieldData, s: float, cfg: EvalConfig | None = None) -> TraceExpansionResult:
    """Evaluate the second-order expansion of Tr exp(-s Delta) for the given fields."""
    if not s > 0:
        raise DomainError("proper time s must be positive")
    vol = fields.volume
    nb = fields.bundle_dim
    zero = (0,) * fields.d
    order0 = nb * vol
    order1 = -s * nb * vol * fields.u_modes.get(zero, 0j).real

    # fixed mode order keeps the sums deterministic
    acc_u = []
    for n, v in fields.u_modes.items():
        x = s * float(fields.momentum(n) @ fields.momentum(n))
        acc_u.append(abs(v) ** 2 * evaluate("u", x, cfg))
    order2_u = s * s * vol * nb * math.fsum(acc_u)

    acc_o = []
    for n, sq in omega_square_modes(fields).items():
        p = fields.momentum(n)
        x = s * float(p @ p)
        if sq:
            acc_o.append(sq * evaluate("omega", x, cfg))
    order2_o = s * s * vol * nb * math.fsum(acc_o)

    pref = (4 * math.pi * s) ** (-fields.d / 2)
    total = pref * math.fsum([order0, order1, order2_u, order2_o])
    return TraceExpansionResult(s, order0, order1, order2_u, order2_o, total)


def coincidence_kernel(fields: FieldData, s: float, x, cfg: EvalConfig | None = None) -> np.ndarray:
    """Fiber-traced K^s(x, x) to first order: (4 pi s)^{-d/2} N [1 + s (g_U(s Box) U)(x)]."""
    if not s > 0:
        raise DomainError("proper time s must be positive")
    points = np.asarray(x, dtype=float)
    single = points.ndim == 0 or (points.ndim == 1 and fields.d > 1)
    points = points.reshape(-1, fields.d)
    acc = np.zeros(points.shape[0], dtype=complex)
    for n, v in fields.u_modes.items():
        p = fields.momentum(n)
        acc += evaluate("gu", s * float(p @ p), cfg) * v * np.exp(1j * points @ p)
    out = (4 * math.pi * s) ** (-fields.d / 2) * fields.bundle_dim * (1.0 + s * acc.real)
    return float(out[0]) if single else out


@dataclass(frozen=True)
class SpectralFunction:
    """A function h(Delta) given through its inverse Laplace transform h~(s).

    ``family`` is ``"heat"`` (h~ = delta(s - t)), ``"massive"``
    (h~ = exp(-s m^2), i.e. h = 1/(Delta + m^2)) or ``"custom"``.
    """

    family: str
    parameter: float | None = None
    inverse_laplace: Callable[[float], float] | None = None
    s_min: float = 0.0
    s_max: float = math.inf
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.family not in ("heat", "massive", "custom"):
            raise DomainError(f"unknown spectral family {self.family!r}")
        if self.family == "heat" and not (self.parameter and self.parameter > 0):
            raise DomainError("the heat family needs t > 0")
        if self.family == "massive" and not (self.parameter and self.parameter > 0):
            raise DomainError("the massive family needs m^2 > 0")
        if self.family == "custom" and self.inverse_laplace is None:
            raise DomainError("a custom spectral function needs h~(s)")
        if not 0 <= self.s_min < self.s_max:
            raise DomainError("need 0 <= s_min < s_max")

    @classmethod
    def heat_kernel(cls, t: float) -> "SpectralFunction":
        return cls("heat", t)

    @classmethod
    def massive_resolvent(cls, m2: float, s_min: float = 0.0) -> "SpectralFunction":
        return cls("massive", m2, s_min=s_min)

    @classmethod
    def custom(cls, h_tilde: Callable[[float], float], s_min: float = 0.0, s_max: float = math.inf,
               rel_tol: float = 1e-10) -> "SpectralFunction":
        return cls("custom", None, h_tilde, s_min, s_max, rel_tol)

    def h_tilde(self, s: float) -> float:
        if self.family == "massive":
            return math.exp(-s * self.parameter)
        return self.inverse_laplace(s)


def _check_endpoints(func: Callable[[float], float], h: SpectralFunction, d: int):
    """Reject integrals whose integrand does not decay faster than 1/s at open endpoints."""
    if h.s_min == 0.0:
        small = [abs(s * func(s)) for s in (1e-6, 1e-9, 1e-12)]
        if small[2] > 1e-300 and small[2] > 0.1 * small[0]:
            raise DivergentIntegral(f"integrand is not integrable at s -> 0 in d = {d}; supply s_min > 0")
    if math.isinf(h.s_max):
        large = [abs(s * func(s)) for s in (1e3, 1e5, 1e7)]
        if large[2] > 1e-300 and large[2] > 1e-6 * large[0]:
            raise DivergentIntegral("integrand does not decay as s -> infinity")


def laplace_trace(fields: FieldData, h: SpectralFunction, cfg: EvalConfig | None = None) -> float:
    """Tr h(Delta) = int_0^inf ds h~(s) Tr exp(-s Delta) over the declared s-range."""
    if h.family == "heat":
        return tr_heat_kernel(fields, h.parameter, cfg).total

    def integrand(s: float) -> float:
        if s <= 0.0:
            return 0.0
        return h.h_tilde(s) * tr_heat_kernel(fields, s, cfg).total

    _check_endpoints(integrand, h, fields.d)
    # s = u^2 removes the s^{-1/2} endpoint behaviour of the d = 1 volume term
    g = lambda u: 2.0 * u * integrand(u * u)
    lo = math.sqrt(h.s_min)
    hi = math.sqrt(h.s_max) if not math.isinf(h.s_max) else math.inf
    opts = dict(epsabs=0.0, epsrel=h.rel_tol, limit=400)
    if math.isinf(hi):
        # split so the quadrature resolves the region around the natural scale
        scale = 1.0 / math.sqrt(h.parameter) if h.family == "massive" else 1.0
        mid = max(lo, scale)
        first, err1 = integrate.quad(g, lo, mid, **opts)
        second, err2 = integrate.quad(g, mid, math.inf, **opts)
        value, err = first + second, err1 + err2
    else:
        value, err = integrate.quad(g, lo, hi, **opts)
    if not math.isfinite(value) or err > 1e3 * h.rel_tol * max(abs(value), 1e-300):
        raise DivergentIntegral(f"quadrature did not converge (estimate {value}, error {err})")
    return float(value)
