"""Vector and symmetric-pair tensor projectors built from a momentum p.

Momenta are 1-d arrays of length d; rank-4 tensors are arrays of shape
``(d, d, d, d)`` indexed ``T[mu, nu, alpha, beta]``. Inner products use the
pair metric, which for pair-symmetric tensors is the full contraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularGram

__all__ = [
    "PROJECTOR_NAMES",
    "ProjectorCoefficients",
    "vector_projectors",
    "tensor_projector",
    "tensor_projectors",
    "symmetric_identity",
    "pair_inner",
    "gram_matrix",
    "gram_diagonal",
    "projector_trace",
    "check_pair_symmetry",
    "decompose",
    "decompose_vector",
    "recompose",
]

PROJECTOR_NAMES = ("2", "1", "S", "Ssigma", "sigmaS", "sigma")
_ALIASES = {
    "2": "2", "p2": "2",
    "1": "1", "p1": "1",
    "s": "S", "ps": "S",
    "ssigma": "Ssigma", "sσ": "Ssigma",
    "sigmas": "sigmaS", "σs": "sigmaS",
    "sigma": "sigma", "σ": "sigma",
}


def _momentum(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError("momentum must be a vector with d >= 2 components")
    if not np.dot(p, p) > 0.0:
        raise DomainError("projectors need a non-zero momentum")
    return p


def _name(name) -> str:
    key = str(name).replace("_", "").lower()
    if key not in _ALIASES:
        raise DomainError(f"unknown projector {name!r}; expected one of {PROJECTOR_NAMES}")
    return _ALIASES[key]


def vector_projectors(p) -> tuple[np.ndarray, np.ndarray]:
    """Transverse and longitudinal projectors (PT, PL) for momentum p."""
    p = _momentum(p)
    pl = np.outer(p, p) / np.dot(p, p)
    return np.eye(p.size) - pl, pl


def tensor_projector(name, p) -> np.ndarray:
    """One of the six projectors ``2, 1, S, Ssigma, sigmaS, sigma``.

    At d = 2 the spin-2 projector vanishes identically and is returned as
    zeros.
    """
    name = _name(name)
    pt, pl = vector_projectors(p)
    d = pt.shape[0]
    if name == "2":
        return (0.5 * (np.einsum("ma,nb->mnab", pt, pt) + np.einsum("mb,na->mnab", pt, pt))
                - np.einsum("mn,ab->mnab", pt, pt) / (d - 1))
    if name == "1":
        return 0.5 * (np.einsum("ma,nb->mnab", pt, pl) + np.einsum("mb,na->mnab", pt, pl)
                      + np.einsum("na,mb->mnab", pt, pl) + np.einsum("nb,ma->mnab", pt, pl))
    if name == "S":
        return np.einsum("mn,ab->mnab", pt, pt) / (d - 1)
    if name == "Ssigma":
        return np.einsum("mn,ab->mnab", pt, pl) / math.sqrt(d - 1)
    if name == "sigmaS":
        return np.einsum("mn,ab->mnab", pl, pt) / math.sqrt(d - 1)
    return np.einsum("mn,ab->mnab", pl, pl)


def tensor_projectors(p) -> dict[str, np.ndarray]:
    """All six projectors keyed by name."""
    return {name: tensor_projector(name, p) for name in PROJECTOR_NAMES}


def symmetric_identity(d: int) -> np.ndarray:
    """The identity on symmetric pairs, (delta delta + delta delta)/2."""
    eye = np.eye(d)
    return 0.5 * (np.einsum("ma,nb->mnab", eye, eye) + np.einsum("mb,na->mnab", eye, eye))


def pair_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Pair-metric inner product of two rank-4 tensors (full contraction)."""
    return float(np.einsum("mnab,mnab->", a, b))


def projector_trace(name, d: int) -> float:
    """Closed-form trace of a projector under the pair metric."""
    name = _name(name)
    return {
        "2": (d + 1) * (d - 2) / 2,
        "1": float(d - 1),
        "S": 1.0,
        "Ssigma": 0.0,
        "sigmaS": 0.0,
        "sigma": 1.0,
    }[name]


def gram_diagonal(name, d: int) -> float:
    """<P_i, P_i> under the pair metric; the Gram matrix has no off-diagonal entries."""
    name = _name(name)
    return {"2": (d + 1) * (d - 2) / 2, "1": float(d - 1)}.get(name, 1.0)


def gram_matrix(p) -> np.ndarray:
    """6x6 matrix of pair inner products between the projectors, in PROJECTOR_NAMES order."""
    basis = tensor_projectors(p)
    return np.array([[pair_inner(basis[i], basis[j]) for j in PROJECTOR_NAMES] for i in PROJECTOR_NAMES])


def check_pair_symmetry(t: np.ndarray, tol: float = 1e-12) -> float:
    """Largest violation of T[mn,ab] = T[nm,ab] = T[mn,ba], relative to max|T|.

    Raises
    ------
    DomainError
        If the violation exceeds ``tol``.
    """
    t = np.asarray(t)
    if t.ndim != 4 or len(set(t.shape)) != 1:
        raise DomainError(f"expected a (d, d, d, d) tensor, got shape {t.shape}")
    scale = max(float(np.max(np.abs(t))), 1.0)
    violation = max(float(np.max(np.abs(t - t.transpose(1, 0, 2, 3)))),
                    float(np.max(np.abs(t - t.transpose(0, 1, 3, 2))))) / scale
    if violation > tol:
        raise DomainError(f"tensor is not pair symmetric (violation {violation:.2e})")
    return violation


@dataclass(frozen=True)
class ProjectorCoefficients:
    """Coefficients of T on the six projectors; ``c2`` is None at d = 2."""

    c2: float | None
    c1: float
    cS: float
    cSsigma: float
    csigmaS: float
    csigma: float
    residual_norm: float

    def as_tuple(self) -> tuple:
        return (self.c2, self.c1, self.cS, self.cSsigma, self.csigmaS, self.csigma)

    def as_dict(self) -> dict:
        return dict(zip(PROJECTOR_NAMES, self.as_tuple()))


def decompose(t, p, include_p2: bool | None = None, symmetry_tol: float = 1e-10) -> ProjectorCoefficients:
    """Project a pair-symmetric tensor onto the six projectors.

    The Gram matrix of the projectors is diagonal, so each coefficient is
    ``<P_i, T> / <P_i, P_i>``. At d = 2 the spin-2 slot is absent; asking
    for it explicitly with ``include_p2=True`` raises :class:`SingularGram`.
    """
    t = np.asarray(t, dtype=float)
    p = _momentum(p)
    d = p.size
    if t.shape != (d,) * 4:
        raise DomainError(f"tensor shape {t.shape} does not match d = {d}")
    check_pair_symmetry(t, symmetry_tol)
    if include_p2 is None:
        include_p2 = d > 2
    if include_p2 and d == 2:
        raise SingularGram("the spin-2 projector vanishes at d = 2")

    basis = tensor_projectors(p)
    coeffs = {}
    remainder = t.copy()
    for name in PROJECTOR_NAMES:
        if name == "2" and not include_p2:
            coeffs[name] = None
            continue
        c = pair_inner(basis[name], t) / gram_diagonal(name, d)
        coeffs[name] = c
        remainder -= c * basis[name]
    return ProjectorCoefficients(*(coeffs[n] for n in PROJECTOR_NAMES),
                                 residual_norm=float(np.linalg.norm(remainder)))


def recompose(coeffs, p) -> np.ndarray:
    """Build sum_i c_i P_i from a coefficient tuple or ProjectorCoefficients."""
    if isinstance(coeffs, ProjectorCoefficients):
        coeffs = coeffs.as_tuple()
    basis = tensor_projectors(p)
    out = np.zeros_like(basis["S"])
    for name, c in zip(PROJECTOR_NAMES, coeffs):
        if c:
            out += c * basis[name]
    return out


def decompose_vector(t, p) -> tuple[float, float, float]:
    """Split a rank-2 tensor as cT PT + cL PL; returns (cT, cL, residual norm)."""
    t = np.asarray(t, dtype=float)
    pt, pl = vector_projectors(p)
    if t.shape != pt.shape:
        raise DomainError(f"tensor shape {t.shape} does not match d = {pt.shape[0]}")
    c_t = float(np.einsum("mn,mn->", pt, t)) / (pt.shape[0] - 1)
    c_l = float(np.einsum("mn,mn->", pl, t))
    residual = float(np.linalg.norm(t - c_t * pt - c_l * pl))
    return c_t, c_l, residual
