"""Basic and derived heat kernel form factors on x >= 0.

Every form factor is stored as an exact Laurent combination

    F(x) = A(x) f(x) + B(x),

where f is the basic form factor and A, B are finite Laurent polynomials
with rational coefficients. The same table yields the small-x Taylor series
(removable poles cancel exactly), the large-x asymptotic series and the
mid-range direct evaluation.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, UnsupportedOrder
from .quadrature import adaptive_gauss_legendre

__all__ = [
    "Tag",
    "FormFactorKind",
    "EvalConfig",
    "SeriesExpansion",
    "Constants",
    "DEFAULT_CONFIG",
    "EXACT_CONSTANTS",
    "basic_f",
    "basic_f_quadrature",
    "evaluate",
    "series",
    "small_x_coefficient",
    "large_x_coefficient",
    "laurent_combination",
]

MAX_SERIES_ORDER = 40
EXACT_ORDER_LIMIT = 20


class Tag(str, Enum):
    BASIC = "basic"
    RIC = "ric"
    R = "r"
    RU = "ru"
    U = "u"
    OMEGA = "omega"
    R2D = "r2d"
    C = "c"
    RBIS = "rbis"
    BV1 = "bv1"
    BV2 = "bv2"
    BV3 = "bv3"
    BV4 = "bv4"
    BV5 = "bv5"
    GU = "gu"
    GR = "gr"


_DIMENSIONFUL = {Tag.C, Tag.RBIS}
_KIND_RE = re.compile(r"^\s*([a-z0-9]+?)\s*(?:\(\s*(\d+)\s*\)|[:_]\s*(\d+))?\s*$")


@dataclass(frozen=True)
class FormFactorKind:
    """Which form factor to evaluate; ``d`` is used by the Weyl-basis kinds only."""

    tag: Tag
    d: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        if self.tag in _DIMENSIONFUL:
            if self.d is None:
                raise DomainError(f"form factor {self.tag.value} needs a dimension d")
            if int(self.d) != self.d or self.d <= 3:
                raise DomainError(f"form factor {self.tag.value} requires integer d >= 4, got {self.d}")
            object.__setattr__(self, "d", int(self.d))
        elif self.d is not None:
            object.__setattr__(self, "d", None)

    @classmethod
    def parse(cls, text, d: int | None = None) -> "FormFactorKind":
        """Parse ``"ric"``, ``"C(4)"``, ``"rbis:6"`` and similar labels."""
        if isinstance(text, FormFactorKind):
            return text
        if isinstance(text, Tag):
            return cls(text, d)
        m = _KIND_RE.match(str(text).lower())
        if not m:
            raise DomainError(f"unrecognised form factor label {text!r}")
        name, dim_a, dim_b = m.groups()
        if name in ("f", "basic_f"):
            name = "basic"
        if name in ("ur",):
            name = "ru"
        if name in ("c", "rbis") and dim_a is None and dim_b is None and d is None:
            raise DomainError(f"form factor {name} needs a dimension, e.g. {name}(4)")
        dim = dim_a or dim_b
        try:
            tag = Tag(name)
        except ValueError:
            raise DomainError(f"unrecognised form factor label {text!r}") from None
        return cls(tag, int(dim) if dim is not None else d)

    @property
    def label(self) -> str:
        return f"{self.tag.value}({self.d})" if self.d is not None else self.tag.value


@dataclass(frozen=True)
class EvalConfig:
    """Branch thresholds and tolerances for form factor evaluation.

    Below ``small_x_cut`` the Taylor series is summed, above ``large_x_cut``
    the optimally truncated asymptotic series; in between adaptive
    Gauss-Legendre quadrature evaluates f.
    """

    small_x_cut: float = 0.5
    large_x_cut: float = 150.0
    series_order: int = 20
    quad_rel_tol: float = 1e-14
    quad_max_depth: int = 50

    def __post_init__(self):
        if not self.small_x_cut >= 0:
            raise DomainError("small_x_cut must be >= 0")
        if not self.large_x_cut > self.small_x_cut:
            raise DomainError("large_x_cut must exceed small_x_cut")
        if not 2 <= self.series_order <= MAX_SERIES_ORDER:
            raise DomainError(f"series_order must lie in [2, {MAX_SERIES_ORDER}]")
        if not 0 < self.quad_rel_tol <= 1e-6:
            raise DomainError("quad_rel_tol must lie in (0, 1e-6]")
        if self.quad_max_depth < 1:
            raise DomainError("quad_max_depth must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "EvalConfig":
        """Default config, with ``HK_QUAD_TOL`` overriding the quadrature tolerance."""
        tol = os.environ.get("HK_QUAD_TOL")
        if tol is not None and "quad_rel_tol" not in overrides:
            try:
                overrides["quad_rel_tol"] = float(tol)
            except ValueError:
                raise DomainError(f"HK_QUAD_TOL={tol!r} is not a number") from None
        return cls(**overrides)


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class SeriesExpansion:
    """Truncated expansion around x = 0 (``"small_x"``) or x = infinity (``"large_x"``).

    ``coefficients[k]`` multiplies ``x**(leading_power + k)`` for small x and
    ``x**(leading_power - k)`` for large x.
    """

    kind: str
    coefficients: tuple
    leading_power: int

    def __call__(self, x: float) -> float:
        step = 1 if self.kind == "small_x" else -1
        return float(sum(float(c) * x ** (self.leading_power + step * k)
                         for k, c in enumerate(self.coefficients)))


@dataclass(frozen=True)
class Constants:
    """Local constants of the heat trace: volume, U and R coefficients."""

    g0: float = 1.0
    gU0: float = -1.0
    gR0: float = 1.0 / 6.0


EXACT_CONSTANTS = Constants()


# ---------------------------------------------------------------------------
# Laurent tables

_F = Fraction

_BASE: dict[Tag, tuple[dict[int, Fraction], dict[int, Fraction]]] = {
    Tag.BASIC: ({0: _F(1)}, {}),
    Tag.RIC: ({-2: _F(1)}, {-1: _F(1, 6), -2: _F(-1)}),
    Tag.R: ({0: _F(1, 32), -1: _F(1, 8), -2: _F(-1, 8)}, {-1: _F(-7, 48), -2: _F(1, 8)}),
    Tag.RU: ({0: _F(-1, 4), -1: _F(-1, 2)}, {-1: _F(1, 2)}),
    Tag.U: ({0: _F(1, 2)}, {}),
    Tag.OMEGA: ({-1: _F(-1, 2)}, {-1: _F(1, 2)}),
    Tag.R2D: ({0: _F(1, 32), -1: _F(1, 8), -2: _F(3, 8)}, {-1: _F(-1, 16), -2: _F(-3, 8)}),
    Tag.GU: ({0: _F(-1)}, {}),
    Tag.GR: ({0: _F(1, 4), -1: _F(1, 2)}, {-1: _F(-1, 2)}),
}

# linear maps of the BV and Weyl bases onto the {Ric, R, RU, U, Omega} set
_BV_MAP = {
    Tag.BV1: {Tag.RIC: _F(1)},
    Tag.BV2: {Tag.R: _F(1), Tag.U: _F(1, 36), Tag.RU: _F(1, 6)},
    Tag.BV3: {Tag.U: _F(-1, 3), Tag.RU: _F(-1)},
    Tag.BV4: {Tag.U: _F(1)},
    Tag.BV5: {Tag.OMEGA: _F(1)},
}


def _weyl_map(tag: Tag, d: int) -> dict[Tag, Fraction]:
    if tag is Tag.C:
        return {Tag.RIC: _F(d - 2, 4 * (d - 3))}
    return {Tag.RIC: _F(d, 4 * (d - 1)), Tag.R: _F(1)}


def _add_scaled(target: dict[int, Fraction], source: dict[int, Fraction], c: Fraction):
    for power, value in source.items():
        target[power] = target.get(power, _F(0)) + c * value


@lru_cache(maxsize=None)
def laurent_combination(kind: FormFactorKind) -> tuple[tuple[tuple[int, Fraction], ...], tuple[tuple[int, Fraction], ...]]:
    """Return (A, B) as sorted ``(power, coefficient)`` tuples with F = A f + B."""
    if kind.tag in _BASE:
        a, b = _BASE[kind.tag]
    else:
        mapping = _BV_MAP[kind.tag] if kind.tag in _BV_MAP else _weyl_map(kind.tag, kind.d)
        a, b = {}, {}
        for base, c in mapping.items():
            _add_scaled(a, _BASE[base][0], c)
            _add_scaled(b, _BASE[base][1], c)
    clean = lambda m: tuple(sorted((p, c) for p, c in m.items() if c != 0))
    return clean(a), clean(b)


def small_x_coefficient(n: int) -> Fraction:
    """Taylor coefficient of x**n in f: (-1)**n n! / (2n+1)!."""
    if n < 0:
        return _F(0)
    return _F((-1) ** n * math.factorial(n), math.factorial(2 * n + 1))


def large_x_coefficient(k: int) -> Fraction:
    """Coefficient of x**-(k+1) in the asymptotic series of f: 2**(k+1) (2k-1)!!."""
    if k < 0:
        return _F(0)
    double_fact = 1
    for j in range(1, 2 * k, 2):
        double_fact *= j
    return _F(2 ** (k + 1) * double_fact)


def _as_kind(kind, d=None) -> FormFactorKind:
    return FormFactorKind.parse(kind, d)


@lru_cache(maxsize=None)
def _small_x_table(kind: FormFactorKind, n_terms: int) -> tuple[Fraction, ...]:
    a, b = laurent_combination(kind)
    b = dict(b)
    min_power = min([p for p, _ in a] + list(b) + [0])
    # poles must cancel exactly
    for m in range(min_power, 0):
        coeff = sum((c * small_x_coefficient(m - p) for p, c in a), _F(0)) + b.get(m, _F(0))
        if coeff != 0:
            raise AssertionError(f"{kind.label}: uncancelled pole x^{m}")
    out = []
    for n in range(n_terms):
        coeff = sum((c * small_x_coefficient(n - p) for p, c in a), _F(0)) + b.get(n, _F(0))
        out.append(coeff)
    return tuple(out)


@lru_cache(maxsize=None)
def _large_x_table(kind: FormFactorKind, n_powers: int) -> tuple[Fraction, ...]:
    """Coefficients of x**-1, x**-2, ..., x**-n_powers."""
    a, b = laurent_combination(kind)
    b = dict(b)
    if any(p > 0 for p, _ in a) or any(p >= 0 for p in b):
        raise AssertionError(f"{kind.label}: non-decaying terms in large-x table")
    out = []
    for m in range(1, n_powers + 1):
        # x^p * x^-(k+1) = x^-m  ->  k = m + p - 1
        coeff = sum((c * large_x_coefficient(m + p - 1) for p, c in a), _F(0)) + b.get(-m, _F(0))
        out.append(coeff)
    return tuple(out)


def series(kind, which: str = "small_x", order: int = 3, d: int | None = None) -> SeriesExpansion:
    """Leading ``order`` coefficients of the small-x or large-x expansion.

    Coefficients are exact :class:`~fractions.Fraction` objects up to order
    20 and floats beyond.
    """
    kind = _as_kind(kind, d)
    which = which.lower().replace("-", "_")
    if which in ("smallx", "small"):
        which = "small_x"
    if which in ("largex", "large"):
        which = "large_x"
    if which not in ("small_x", "large_x"):
        raise ValueError(f"which must be 'small_x' or 'large_x', got {which!r}")
    if not 1 <= order <= MAX_SERIES_ORDER:
        raise UnsupportedOrder(f"order must lie in [1, {MAX_SERIES_ORDER}], got {order}")

    if which == "small_x":
        coeffs = _small_x_table(kind, order)
        leading = 0
    else:
        table = _large_x_table(kind, order + 4)
        first = next(i for i, c in enumerate(table) if c != 0)
        table = _large_x_table(kind, first + order)
        coeffs = table[first:first + order]
        leading = -(first + 1)
    if order > EXACT_ORDER_LIMIT:
        coeffs = tuple(float(c) for c in coeffs)
    return SeriesExpansion(which, tuple(coeffs), leading)


# ---------------------------------------------------------------------------
# evaluation


def _sum_small_x(coeffs, x: float) -> float:
    total = 0.0
    for c in reversed(coeffs):
        total = total * x + c
    return total


@lru_cache(maxsize=None)
def _small_x_floats(kind: FormFactorKind, n_terms: int) -> tuple[float, ...]:
    return tuple(float(c) for c in _small_x_table(kind, n_terms))


@lru_cache(maxsize=None)
def _large_x_floats(kind: FormFactorKind) -> tuple[float, ...]:
    return tuple(float(c) for c in _large_x_table(kind, MAX_SERIES_ORDER + 8))


def _sum_large_x(kind: FormFactorKind, x: float, rel_tol: float) -> float:
    """Optimally truncated asymptotic sum: stop once terms are negligible or grow."""
    coeffs = _large_x_floats(kind)
    total = 0.0
    inv = 1.0 / x
    power = inv
    prev = math.inf
    for c in coeffs:
        term = c * power
        power *= inv
        if term == 0.0:
            continue
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if abs(term) <= 0.1 * rel_tol * abs(total):
            break
    return total


def basic_f_quadrature(x: float, rel_tol: float = 1e-14, max_depth: int = 50) -> float:
    """f(x) by adaptive Gauss-Legendre, using the symmetry about xi = 1/2."""
    integrand = lambda xi: np.exp(-x * xi * (1.0 - xi))
    return 2.0 * float(adaptive_gauss_legendre(integrand, 0.0, 0.5, rel_tol=rel_tol, max_depth=max_depth))


def _check_x(x) -> float:
    x = float(x)
    if not x >= 0.0:
        raise DomainError(f"form factors are defined for x >= 0, got {x}")
    return x


def _scalar_basic_f(x: float, cfg: EvalConfig) -> float:
    x = _check_x(x)
    if x < cfg.small_x_cut:
        return _sum_small_x(_small_x_floats(FormFactorKind(Tag.BASIC), cfg.series_order), x)
    if x > cfg.large_x_cut:
        return _sum_large_x(FormFactorKind(Tag.BASIC), x, cfg.quad_rel_tol)
    return basic_f_quadrature(x, cfg.quad_rel_tol, cfg.quad_max_depth)


def basic_f(x, cfg: EvalConfig | None = None):
    """The basic form factor f(x) = int_0^1 exp(-x xi (1 - xi)) dxi.

    Accepts a scalar or an array of non-negative arguments.
    """
    cfg = cfg or DEFAULT_CONFIG
    if np.ndim(x) == 0:
        return _scalar_basic_f(x, cfg)
    arr = np.asarray(x, dtype=float)
    return np.array([_scalar_basic_f(v, cfg) for v in arr.ravel()]).reshape(arr.shape)


def _scalar_evaluate(kind: FormFactorKind, x: float, cfg: EvalConfig) -> float:
    x = _check_x(x)
    if kind.tag is Tag.BASIC:
        return _scalar_basic_f(x, cfg)
    if x < cfg.small_x_cut:
        return _sum_small_x(_small_x_floats(kind, cfg.series_order), x)
    if x > cfg.large_x_cut:
        return _sum_large_x(kind, x, cfg.quad_rel_tol)
    f = basic_f_quadrature(x, cfg.quad_rel_tol, cfg.quad_max_depth)
    a, b = laurent_combination(kind)
    return (sum(float(c) * x ** p for p, c in a) * f
            + sum(float(c) * x ** p for p, c in b))


def evaluate(kind, x, cfg: EvalConfig | None = None, d: int | None = None):
    """Evaluate the named form factor at ``x`` (scalar or array).

    ``kind`` is a :class:`FormFactorKind` or a label such as ``"ric"`` or
    ``"c(4)"``.
    """
    kind = _as_kind(kind, d)
    cfg = cfg or DEFAULT_CONFIG
    if np.ndim(x) == 0:
        return _scalar_evaluate(kind, x, cfg)
    arr = np.asarray(x, dtype=float)
    return np.array([_scalar_evaluate(kind, v, cfg) for v in arr.ravel()]).reshape(arr.shape)
