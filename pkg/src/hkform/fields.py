"""Fourier-mode field data on a periodic box.

Fields are stored as U(x) = sum_n U_n exp(i p_n . x) with p_n = 2 pi n / L
(no 1/V factor) and, for an abelian connection A_mu = i theta_mu with real
theta, theta_mu(x) = sum_n theta_{mu,n} exp(i p_n . x). Reality requires
U_{-n} = conj(U_n) and likewise for theta.

JSON layout::

    {"d": 1, "L": 1.0, "bundle_dim": 1,
     "u_modes": [{"n": [4], "re": 0.01, "im": 0.0}, ...],
     "a_modes": [{"mu": 0, "n": [0, 1], "re": 0.01, "im": 0.0}, ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FieldDataError

__all__ = ["FieldData", "load_fields", "save_fields"]

_REALITY_TOL = 1e-12


def _key(n, d: int) -> tuple[int, ...]:
    try:
        key = tuple(int(v) for v in n)
    except TypeError:
        raise FieldDataError(f"mode index {n!r} is not a list of integers") from None
    if len(key) != d or any(k != v for k, v in zip(key, n)):
        raise FieldDataError(f"mode index {list(n)} must be {d} integers")
    return key


def _neg(n: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-v for v in n)


@dataclass(frozen=True)
class FieldData:
    """Endomorphism and abelian connection modes on a box of side L in d dimensions."""

    d: int
    box_length: float
    u_modes: dict = field(default_factory=dict)
    a_modes: dict = field(default_factory=dict)
    bundle_dim: int = 1

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise FieldDataError(f"d must be 1, 2 or 3, got {self.d}")
        if not self.box_length > 0:
            raise FieldDataError("box length must be positive")
        if int(self.bundle_dim) != self.bundle_dim or self.bundle_dim < 1:
            raise FieldDataError("bundle_dim must be a positive integer")
        u = {_key(n, self.d): complex(v) for n, v in self.u_modes.items()}
        a = {}
        for (mu, n), v in self.a_modes.items():
            if int(mu) != mu or not 0 <= mu < self.d:
                raise FieldDataError(f"connection component {mu} out of range for d = {self.d}")
            a[(int(mu), _key(n, self.d))] = complex(v)
        for n, v in u.items():
            partner = u.get(_neg(n), 0.0)
            if abs(partner - v.conjugate()) > _REALITY_TOL * max(1.0, abs(v)):
                raise FieldDataError(f"U modes violate reality at n = {list(n)}")
        for (mu, n), v in a.items():
            partner = a.get((mu, _neg(n)), 0.0)
            if abs(partner - v.conjugate()) > _REALITY_TOL * max(1.0, abs(v)):
                raise FieldDataError(f"theta_{mu} modes violate reality at n = {list(n)}")
        object.__setattr__(self, "u_modes", dict(sorted(u.items())))
        object.__setattr__(self, "a_modes", dict(sorted(a.items())))
        object.__setattr__(self, "bundle_dim", int(self.bundle_dim))

    # construction helpers ----------------------------------------------
    @classmethod
    def zero(cls, d: int, box_length: float, bundle_dim: int = 1) -> "FieldData":
        return cls(d, box_length, {}, {}, bundle_dim)

    @classmethod
    def constant_u(cls, d: int, box_length: float, u: float, bundle_dim: int = 1) -> "FieldData":
        return cls(d, box_length, {(0,) * d: u}, {}, bundle_dim)

    @classmethod
    def single_mode_u(cls, d: int, box_length: float, n, eps: float, bundle_dim: int = 1) -> "FieldData":
        """U(x) = 2 eps cos(p_n . x)."""
        n = tuple(int(v) for v in n)
        return cls(d, box_length, {n: eps, _neg(n): eps}, {}, bundle_dim)

    @classmethod
    def single_mode_theta(cls, d: int, box_length: float, mu: int, n, eps: float,
                          bundle_dim: int = 1) -> "FieldData":
        """theta_mu(x) = 2 eps cos(p_n . x), all other components zero."""
        n = tuple(int(v) for v in n)
        return cls(d, box_length, {}, {(mu, n): eps, (mu, _neg(n)): eps}, bundle_dim)

    def scaled(self, eps: float) -> "FieldData":
        """All amplitudes multiplied by eps."""
        return FieldData(self.d, self.box_length,
                         {n: eps * v for n, v in self.u_modes.items()},
                         {k: eps * v for k, v in self.a_modes.items()},
                         self.bundle_dim)

    # evaluation ---------------------------------------------------------
    @property
    def volume(self) -> float:
        return self.box_length ** self.d

    def momentum(self, n) -> np.ndarray:
        return 2 * math.pi / self.box_length * np.asarray(n, dtype=float)

    def theta_modes(self) -> dict:
        """Map n -> complex vector of theta_mu amplitudes."""
        out: dict = {}
        for (mu, n), v in self.a_modes.items():
            out.setdefault(n, np.zeros(self.d, dtype=complex))[mu] += v
        return dict(sorted(out.items()))

    def _sample(self, modes: dict, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != self.d:
            points = points.reshape(-1, self.d)
        total = np.zeros(points.shape[0], dtype=complex)
        for n, v in modes.items():
            total += v * np.exp(1j * points @ self.momentum(n))
        return total.real

    def u_at(self, points) -> np.ndarray:
        """Real U sampled at an array of points of shape (m, d)."""
        return self._sample(self.u_modes, points)

    def theta_at(self, mu: int, points) -> np.ndarray:
        """Real theta_mu sampled at an array of points of shape (m, d)."""
        modes = {n: v for (m, n), v in self.a_modes.items() if m == mu}
        return self._sample(modes, points)

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "d": self.d,
            "L": self.box_length,
            "bundle_dim": self.bundle_dim,
            "u_modes": [{"n": list(n), "re": v.real, "im": v.imag} for n, v in self.u_modes.items()],
            "a_modes": [{"mu": mu, "n": list(n), "re": v.real, "im": v.imag}
                        for (mu, n), v in self.a_modes.items()],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FieldData":
        try:
            d = int(doc["d"])
            length = float(doc["L"])
            bundle_dim = int(doc.get("bundle_dim", 1))
            u = {}
            for m in doc.get("u_modes", []):
                key = _key(m["n"], d)
                u[key] = u.get(key, 0) + complex(float(m.get("re", 0.0)), float(m.get("im", 0.0)))
            a = {}
            for m in doc.get("a_modes", []):
                key = (int(m["mu"]), _key(m["n"], d))
                a[key] = a.get(key, 0) + complex(float(m.get("re", 0.0)), float(m.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise FieldDataError(f"malformed field data: {exc}") from None
        return cls(d, length, u, a, bundle_dim)


def load_fields(path) -> FieldData:
    """Read and validate a field-data JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FieldDataError(f"cannot read field data from {path}: {exc}") from None
    return FieldData.from_json(doc)


def save_fields(fields: FieldData, path) -> None:
    Path(path).write_text(json.dumps(fields.to_json(), indent=2) + "\n")
