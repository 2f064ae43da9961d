"""Tensor polynomials in a Gaussian loop momentum and their exact integrals.

A :class:`LoopPoly` represents

    sum_r sum_k  C_r[k, o_1..o_m, l_1..l_r]  xi**k  ell^{l_1} ... ell^{l_r}

where ``ell`` is the shifted loop momentum, ``xi`` the Feynman parameter and
``o_*`` free output indices. Integrals over ``ell`` against exp(-s ell^2)
reduce to the Gaussian moments of :func:`gaussian_moment`; integrals over
``xi`` against exp(-x xi (1-xi)) reduce to :func:`xi_moments`.
"""

from __future__ import annotations

import string
from functools import lru_cache

import numpy as np

from .errors import DomainError, UnsupportedRank
from .quadrature import adaptive_gauss_legendre

__all__ = ["LoopPoly", "gaussian_moment", "xi_moments", "integrate_loop", "integrate_xi"]

_LETTERS = string.ascii_lowercase


@lru_cache(maxsize=64)
def _moment_unit(rank: int, d: int) -> np.ndarray:
    eye = np.eye(d)
    if rank == 0:
        out = np.ones(())
    elif rank % 2:
        out = np.zeros((d,) * rank)
    elif rank == 2:
        out = eye.copy()
    else:
        out = (np.einsum("ab,cd->abcd", eye, eye) + np.einsum("ac,bd->abcd", eye, eye)
               + np.einsum("ad,bc->abcd", eye, eye))
    out.setflags(write=False)
    return out


def gaussian_moment(rank: int, s: float, d: int) -> np.ndarray:
    """Normalized moment of exp(-s q^2) over d-dimensional momentum space.

    Returns int d^dq/(2pi)^d q^{mu_1}...q^{mu_r} e^{-s q^2} divided by
    (4 pi s)^{-d/2}: 1, 0, delta/(2s), 0 and the three-term delta product
    over 4 s^2 for ranks 0 to 4.
    """
    if rank < 0 or rank > 4:
        raise UnsupportedRank(f"Gaussian moments are implemented up to rank 4, got {rank}")
    if not s > 0:
        raise DomainError("proper time s must be positive")
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    return _moment_unit(rank, int(d)) / (2.0 * s) ** (rank // 2)


def _conv_shape(a: np.ndarray, b: np.ndarray) -> int:
    return a.shape[0] + b.shape[0] - 1


class LoopPoly:
    """Tensor-valued polynomial in the loop momentum and the Feynman parameter.

    Parameters
    ----------
    terms : dict
        Maps loop rank r to an array of shape ``(n_xi, *(d,)*out_rank, *(d,)*r)``.
    out_rank : int
        Number of free output indices.
    d : int
        Dimension.
    """

    __slots__ = ("terms", "out_rank", "d")

    def __init__(self, terms: dict, out_rank: int, d: int):
        self.terms = {r: np.asarray(c, dtype=float) for r, c in terms.items()}
        self.out_rank = out_rank
        self.d = d
        for r, c in self.terms.items():
            if c.ndim != 1 + out_rank + r:
                raise ValueError(f"rank {r} term has {c.ndim} axes, expected {1 + out_rank + r}")

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, tensor, d: int) -> "LoopPoly":
        tensor = np.asarray(tensor, dtype=float)
        return cls({0: tensor[None]}, tensor.ndim, d)

    @classmethod
    def momentum(cls, loop_coeff: float, ext, d: int, xi_coeffs=None) -> "LoopPoly":
        """The vector ``loop_coeff * ell + sum_k xi**k * xi_coeffs[k] * ext``.

        ``xi_coeffs`` defaults to ``(1,)``, i.e. a constant shift by ``ext``.
        """
        ext = np.zeros(d) if ext is None else np.asarray(ext, dtype=float)
        xi_coeffs = (1.0,) if xi_coeffs is None else tuple(xi_coeffs)
        terms = {0: np.array([c * ext for c in xi_coeffs])}
        if loop_coeff:
            terms[1] = loop_coeff * np.eye(d)[None]
        return cls(terms, 1, d)

    # algebra ------------------------------------------------------------
    def _check(self, other: "LoopPoly"):
        if self.d != other.d:
            raise DomainError("dimension mismatch between loop polynomials")

    def __add__(self, other: "LoopPoly") -> "LoopPoly":
        self._check(other)
        if self.out_rank != other.out_rank:
            raise DomainError("cannot add loop polynomials of different output rank")
        terms = {}
        for r in set(self.terms) | set(other.terms):
            a = self.terms.get(r)
            b = other.terms.get(r)
            if a is None or b is None:
                terms[r] = (a if b is None else b).copy()
                continue
            n = max(a.shape[0], b.shape[0])
            out = np.zeros((n,) + a.shape[1:])
            out[: a.shape[0]] += a
            out[: b.shape[0]] += b
            terms[r] = out
        return LoopPoly(terms, self.out_rank, self.d)

    def __neg__(self) -> "LoopPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "LoopPoly") -> "LoopPoly":
        return self + (-other)

    def scale(self, c: float) -> "LoopPoly":
        return LoopPoly({r: c * t for r, t in self.terms.items()}, self.out_rank, self.d)

    def times_xi(self, coeffs) -> "LoopPoly":
        """Multiply by the polynomial sum_k coeffs[k] xi**k."""
        coeffs = np.asarray(coeffs, dtype=float)
        terms = {}
        for r, t in self.terms.items():
            out = np.zeros((t.shape[0] + coeffs.size - 1,) + t.shape[1:])
            for k, c in enumerate(coeffs):
                out[k: k + t.shape[0]] += c * t
            terms[r] = out
        return LoopPoly(terms, self.out_rank, self.d)

    def outer(self, other: "LoopPoly") -> "LoopPoly":
        """Tensor product; output indices of ``self`` come first."""
        self._check(other)
        m1, m2 = self.out_rank, other.out_rank
        terms: dict[int, np.ndarray] = {}
        for r1, a in self.terms.items():
            for r2, b in other.terms.items():
                n = _conv_shape(a, b)
                prod = np.zeros((n,) + a.shape[1:1 + m1] + b.shape[1:1 + m2]
                                + a.shape[1 + m1:] + b.shape[1 + m2:])
                for i in range(a.shape[0]):
                    for j in range(b.shape[0]):
                        block = np.multiply.outer(a[i], b[j])
                        # (o1, l1, o2, l2) -> (o1, o2, l1, l2)
                        axes = (list(range(m1)) + list(range(m1 + r1, m1 + r1 + m2))
                                + list(range(m1, m1 + r1)) + list(range(m1 + r1 + m2, m1 + r1 + m2 + r2)))
                        prod[i + j] += block.transpose(axes)
                r = r1 + r2
                terms[r] = prod if r not in terms else _padded_sum(terms[r], prod)
        return LoopPoly(terms, m1 + m2, self.d)

    def contract(self, i: int, j: int) -> "LoopPoly":
        """Trace over output indices i and j."""
        terms = {r: np.trace(t, axis1=1 + i, axis2=1 + j) for r, t in self.terms.items()}
        return LoopPoly(terms, self.out_rank - 2, self.d)

    def dot(self, other: "LoopPoly") -> "LoopPoly":
        """Scalar product of two vector-valued polynomials."""
        if self.out_rank != 1 or other.out_rank != 1:
            raise DomainError("dot needs two vectors")
        return self.outer(other).contract(0, 1)

    def transpose(self, perm) -> "LoopPoly":
        """Permute the output indices."""
        perm = list(perm)
        terms = {}
        for r, t in self.terms.items():
            axes = [0] + [1 + p for p in perm] + list(range(1 + self.out_rank, t.ndim))
            terms[r] = t.transpose(axes)
        return LoopPoly(terms, self.out_rank, self.d)

    def symmetrize(self, i: int, j: int) -> "LoopPoly":
        """Symmetrize output indices i and j with weight 1/2."""
        perm = list(range(self.out_rank))
        perm[i], perm[j] = perm[j], perm[i]
        swapped = self.transpose(perm)
        return (self + swapped).scale(0.5)

    def max_rank(self) -> int:
        return max(self.terms) if self.terms else 0

    def at_zero_loop(self, xi: float = 0.0) -> np.ndarray:
        """Value at ell = 0 and the given xi."""
        t = self.terms.get(0)
        if t is None:
            return np.zeros((self.d,) * self.out_rank)
        powers = xi ** np.arange(t.shape[0])
        return np.tensordot(powers, t, axes=(0, 0))


def _padded_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(a.shape[0], b.shape[0])
    out = np.zeros((n,) + a.shape[1:])
    out[: a.shape[0]] += a
    out[: b.shape[0]] += b
    return out


def integrate_loop(poly: LoopPoly, s: float, other: LoopPoly | None = None) -> np.ndarray:
    """Gaussian loop integral of ``poly`` (or of ``poly (x) other``).

    Returns the xi-polynomial coefficients, shape ``(n_xi, *out)``. When
    ``other`` is given the product is contracted against the moments
    directly, never materializing the full product tensor.
    """
    d = poly.d
    if other is None:
        result = None
        for r, t in poly.terms.items():
            if r % 2:
                continue
            m = gaussian_moment(r, s, d)
            val = np.tensordot(t, m, axes=(list(range(t.ndim - r, t.ndim)), list(range(r)))) if r else t
            result = val if result is None else _padded_sum(result, val)
        if result is None:
            return np.zeros((1,) + (d,) * poly.out_rank)
        return result

    if poly.d != other.d:
        raise DomainError("dimension mismatch between loop polynomials")
    m1, m2 = poly.out_rank, other.out_rank
    result = None
    for r1, a in poly.terms.items():
        for r2, b in other.terms.items():
            r = r1 + r2
            if r % 2:
                continue
            mom = gaussian_moment(r, s, d)
            o1 = _LETTERS[:m1]
            o2 = _LETTERS[m1:m1 + m2]
            l1 = _LETTERS[m1 + m2:m1 + m2 + r1]
            l2 = _LETTERS[m1 + m2 + r1:m1 + m2 + r]
            spec = f"X{o1}{l1},Y{o2}{l2},{l1}{l2}->XY{o1}{o2}"
            val = np.einsum(spec, a, b, mom, optimize=True)
            n = a.shape[0] + b.shape[0] - 1
            conv = np.zeros((n,) + val.shape[2:])
            for i in range(a.shape[0]):
                for j in range(b.shape[0]):
                    conv[i + j] += val[i, j]
            result = conv if result is None else _padded_sum(result, conv)
    if result is None:
        return np.zeros((1,) + (d,) * (m1 + m2))
    return result


def xi_moments(x: float, m_max: int, rel_tol: float = 1e-14) -> np.ndarray:
    """J_m(x) = int_0^1 xi**m exp(-x xi (1 - xi)) dxi for m = 0..m_max."""
    if not x >= 0:
        raise DomainError(f"x must be non-negative, got {x}")
    powers = np.arange(m_max + 1)[:, None]

    def integrand(xi):
        return xi[None, :] ** powers * np.exp(-x * xi * (1.0 - xi))[None, :]

    return np.asarray(adaptive_gauss_legendre(integrand, 0.0, 1.0, rel_tol=rel_tol))


def integrate_xi(coeffs: np.ndarray, x: float, rel_tol: float = 1e-14) -> np.ndarray:
    """Contract xi-polynomial coefficients (axis 0) with J_m(x)."""
    coeffs = np.asarray(coeffs, dtype=float)
    moments = xi_moments(x, coeffs.shape[0] - 1, rel_tol)
    return np.tensordot(moments, coeffs, axes=(0, 0))
