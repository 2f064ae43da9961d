"""Linear changes of basis between second-order form-factor sets.

Sets carry callables ``x -> value`` rather than sampled arrays, so maps
compose without interpolation. The ``ricr`` and ``bv`` bases are dimension
free; the ``weyl`` basis carries the dimension d >= 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Mapping

from .errors import DomainError
from .form_factors import EvalConfig, evaluate

__all__ = [
    "FormFactorSet",
    "SLOTS",
    "closed_form_set",
    "riemann_reduce",
    "to_weyl",
    "from_weyl",
    "to_bv",
    "from_bv",
    "linear_combination",
]

SLOTS = {
    "ricr": ("ric", "r", "ru", "u", "omega"),
    "weyl": ("c", "rbis", "ru", "u", "omega"),
    "bv": ("f1", "f2", "f3", "f4", "f5"),
}

FormFactorFn = Callable[[float], float]


@dataclass(frozen=True)
class FormFactorSet:
    """A complete set of second-order form factors in one basis."""

    basis: str
    entries: Mapping[str, FormFactorFn]
    d: int | None = None

    def __post_init__(self):
        if self.basis not in SLOTS:
            raise DomainError(f"unknown basis {self.basis!r}")
        missing = set(SLOTS[self.basis]) - set(self.entries)
        extra = set(self.entries) - set(SLOTS[self.basis])
        if missing or extra:
            raise DomainError(f"{self.basis} set needs slots {SLOTS[self.basis]}, "
                              f"missing {sorted(missing)}, unexpected {sorted(extra)}")
        if self.basis == "weyl":
            _check_weyl_dim(self.d)

    def __getitem__(self, slot: str) -> FormFactorFn:
        return self.entries[slot]

    def __call__(self, x) -> dict:
        """Evaluate every slot at ``x``."""
        return {slot: self.entries[slot](x) for slot in SLOTS[self.basis]}


def _check_weyl_dim(d):
    if d is None or int(d) != d or d <= 3:
        raise DomainError(f"the Weyl basis requires integer d >= 4, got {d}")


def linear_combination(terms) -> FormFactorFn:
    """Callable for sum_i c_i g_i(x), given ``terms`` as (c_i, g_i) pairs."""
    terms = tuple((float(c), g) for c, g in terms if c != 0)

    def combined(x):
        total = 0.0
        for c, g in terms:
            total = total + c * g(x)
        return total

    return combined


def closed_form_set(basis: str = "ricr", d: int | None = None, cfg: EvalConfig | None = None) -> FormFactorSet:
    """The closed-form heat-trace form factors expressed in ``basis``."""
    ricr = FormFactorSet("ricr", {slot: partial(evaluate, slot, cfg=cfg) for slot in SLOTS["ricr"]})
    if basis == "ricr":
        return ricr
    if basis == "weyl":
        return to_weyl(ricr, d)
    if basis == "bv":
        return to_bv(ricr)
    raise DomainError(f"unknown basis {basis!r}")


def riemann_reduce(f_riem: FormFactorFn, f_ric: FormFactorFn, f_r: FormFactorFn):
    """Absorb a Riemann-squared form factor into the Ricci and scalar ones.

    Returns ``(f_ric + 4 f_riem, f_r - f_riem)``.
    """
    return (linear_combination([(1, f_ric), (4, f_riem)]),
            linear_combination([(1, f_r), (-1, f_riem)]))


def _require(ffs: FormFactorSet, basis: str):
    if ffs.basis != basis:
        raise DomainError(f"expected a {basis} set, got {ffs.basis}")


def to_weyl(ffs: FormFactorSet, d: int) -> FormFactorSet:
    """{Ric, R} basis to the Weyl basis in dimension d >= 4."""
    _require(ffs, "ricr")
    _check_weyl_dim(d)
    c_coef = (d - 2) / (4 * (d - 3))
    rbis_coef = d / (4 * (d - 1))
    entries = {
        "c": linear_combination([(c_coef, ffs["ric"])]),
        "rbis": linear_combination([(rbis_coef, ffs["ric"]), (1, ffs["r"])]),
        "ru": ffs["ru"],
        "u": ffs["u"],
        "omega": ffs["omega"],
    }
    return FormFactorSet("weyl", entries, int(d))


def from_weyl(ffs: FormFactorSet) -> FormFactorSet:
    """Inverse of :func:`to_weyl`."""
    _require(ffs, "weyl")
    d = ffs.d
    ric_coef = 4 * (d - 3) / (d - 2)
    entries = {
        "ric": linear_combination([(ric_coef, ffs["c"])]),
        "r": linear_combination([(1, ffs["rbis"]), (-d / (4 * (d - 1)) * ric_coef, ffs["c"])]),
        "ru": ffs["ru"],
        "u": ffs["u"],
        "omega": ffs["omega"],
    }
    return FormFactorSet("ricr", entries)


def to_bv(ffs: FormFactorSet) -> FormFactorSet:
    """{Ric, R} basis to the BV basis, where the source slot is P = -U + R/6."""
    _require(ffs, "ricr")
    entries = {
        "f1": ffs["ric"],
        "f2": linear_combination([(1, ffs["r"]), (1 / 36, ffs["u"]), (1 / 6, ffs["ru"])]),
        "f3": linear_combination([(-1 / 3, ffs["u"]), (-1, ffs["ru"])]),
        "f4": ffs["u"],
        "f5": ffs["omega"],
    }
    return FormFactorSet("bv", entries)


def from_bv(ffs: FormFactorSet) -> FormFactorSet:
    """Inverse of :func:`to_bv`."""
    _require(ffs, "bv")
    # f_RU = -f3 - f4/3 ; f_R = f2 - f4/36 - f_RU/6 = f2 + f3/6 + f4/36
    entries = {
        "ric": ffs["f1"],
        "r": linear_combination([(1, ffs["f2"]), (1 / 6, ffs["f3"]), (1 / 36, ffs["f4"])]),
        "ru": linear_combination([(-1, ffs["f3"]), (-1 / 3, ffs["f4"])]),
        "u": ffs["f4"],
        "omega": ffs["f5"],
    }
    return FormFactorSet("ricr", entries)
