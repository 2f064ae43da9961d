"""Momentum-space diagrams for the heat trace and the coincidence-limit kernel.

The 0-, 1- and 2-point functions of Tr exp(-s Delta) and the 1-point
functions of the untraced kernel K^s(x, x) are assembled from vertices of
the Laplacian action, Gaussian loop moments and a single Feynman-parameter
integral. Results are normalized: the factor (4 pi s)^{-d/2} and the bundle
traces (tr 1, tr T^a, tr T^(a T^b)) are divided out.

Two-point geometry, for vertex X with incoming momentum P and vertex Y
with -P: the propagators carry q for proper time s(1 - xi) and q + P for
s xi, the loop momentum is shifted to ell = q + xi P and the X legs are
(q, -(q+P)), the Y legs (q+P, -q). Both cyclic orderings are summed with
the weight (1 - xi) of the time-ordered double integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    SingularSystem,
    UnsupportedArity,
    UnsupportedKinematics,
)
from .form_factors import EXACT_CONSTANTS, Constants, evaluate
from .loop_algebra import LoopPoly, integrate_loop, integrate_xi
from .projectors import ProjectorCoefficients, decompose, decompose_vector
from .quadrature import adaptive_gauss_legendre

__all__ = [
    "CHANNELS",
    "VERTEX_KINDS",
    "ChainSpec",
    "DiagramResult",
    "propagator_chain",
    "vertex",
    "npoint",
    "ansatz_npoint",
    "extract_form_factors",
    "extract_constants",
    "printed_trhh",
    "trhh_vertex_diagnostic",
    "momentum_for",
]

CHANNELS = ("Tr0", "TrU", "Trh", "TrUU", "TrAA", "Trhh", "TrhU", "TrAh", "K_U", "K_h")
VERTEX_KINDS = ("U1", "U2", "A1", "A2", "h1", "h2", "Uh", "Ah")
H2_TRACE_TERM = {"derived": 1.0 / 8.0, "printed": 1.0 / 4.0}

_BUNDLE_TRACE = {
    "Tr0": "tr 1", "TrU": "tr T^a", "Trh": "tr 1", "TrUU": "tr T^(a T^b)",
    "TrAA": "tr T^(a T^b)", "Trhh": "tr 1", "TrhU": "tr T^a", "TrAh": "tr T^a",
    "K_U": "T^a", "K_h": "1",
}


# ---------------------------------------------------------------------------
# propagator chains


@dataclass(frozen=True)
class ChainSpec:
    """Proper time and the ordered momenta p_1..p_n of a propagator chain."""

    s: float
    momenta: tuple
    d: int | None = None

    def __post_init__(self):
        moms = tuple(np.atleast_1d(np.asarray(m, dtype=float)) for m in self.momenta)
        if not moms:
            raise DomainError("a propagator chain needs at least one momentum")
        if not self.s > 0:
            raise DomainError("proper time s must be positive")
        dims = {m.size for m in moms}
        if len(dims) != 1:
            raise DomainError("all chain momenta must have the same dimension")
        object.__setattr__(self, "momenta", moms)
        object.__setattr__(self, "d", moms[0].size if self.d is None else self.d)

    @property
    def energies(self) -> np.ndarray:
        return np.array([float(m @ m) for m in self.momenta])


def _chain_nested(k: int, t: np.ndarray, s: float, e: np.ndarray, rel_tol: float) -> np.ndarray:
    """H_k(t) = int_0^t dt_k exp(-s (t - t_k) E_k) H_{k+1}(t_k), with H_n(t) = exp(-s t E_n)."""
    n = e.size
    if k == n:
        return np.exp(-s * t * e[n - 1])

    def integrand(u):
        t_k = np.multiply.outer(t, u)
        inner = _chain_nested(k + 1, t_k.ravel(), s, e, rel_tol).reshape(t_k.shape)
        return t[:, None] * np.exp(-s * (t[:, None] - t_k) * e[k - 1]) * inner

    return np.asarray(adaptive_gauss_legendre(integrand, 0.0, 1.0, rel_tol=rel_tol))


def propagator_chain(spec: ChainSpec, rel_tol: float = 1e-13) -> float:
    """Ordered parametric integral of a chain of n flat heat kernels.

    The exponent is -s[(1 - t_1) p_1^2 + (t_1 - t_2) p_2^2 + ... + t_{n-1} p_n^2]
    over 1 >= t_1 >= ... >= t_{n-1} >= 0. n = 1 is the bare exponential,
    n = 2 a single parameter integral and n = 3, 4 nested adaptive
    quadrature.
    """
    e = spec.energies
    n = e.size
    if n > 4:
        raise UnsupportedArity(f"propagator chains are implemented for n <= 4, got {n}")
    if n == 1:
        return float(math.exp(-spec.s * e[0]))
    return float(_chain_nested(1, np.array([1.0]), spec.s, e, rel_tol)[0])


# ---------------------------------------------------------------------------
# vertices


def _sym_outer(k1: LoopPoly, k2: LoopPoly) -> LoopPoly:
    return k1.outer(k2).symmetrize(0, 1)


def _v_h1(k1: LoopPoly, k2: LoopPoly) -> LoopPoly:
    total = k1 + k2
    trace = total.dot(total).outer(LoopPoly.constant(np.eye(k1.d), k1.d))
    return _sym_outer(k1, k2) - trace.scale(0.25)


def _v_h2(q: LoopPoly, p: np.ndarray, variant: str) -> LoopPoly:
    d = q.d
    eye = LoopPoly.constant(np.eye(d), d)
    core = q.outer(eye).outer(q).symmetrize(0, 1).symmetrize(2, 3)
    trace = LoopPoly.constant(np.einsum("mn,ab->mnab", np.eye(d), np.eye(d)), d)
    return core.scale(2.0) + trace.scale(H2_TRACE_TERM[variant] * float(p @ p))


def _v_ah(k1: LoopPoly, k2: LoopPoly) -> LoopPoly:
    # output order (rho, mu, nu): rho the connection index, (mu nu) the metric pair
    d = k1.d
    t = (k1 - k2).outer(LoopPoly.constant(np.eye(d), d)).transpose((2, 0, 1))
    return t.symmetrize(1, 2).scale(-1.0)


def _vertex_poly(kind: str, k1: LoopPoly, k2: LoopPoly) -> LoopPoly:
    d = k1.d
    if kind == "U1":
        return LoopPoly.constant(1.0, d)
    if kind == "U2":
        return LoopPoly.constant(0.0, d)
    if kind == "A1":
        return k1 - k2
    if kind == "A2":
        return LoopPoly.constant(2.0 * np.eye(d), d)
    if kind == "h1":
        return _v_h1(k1, k2)
    if kind == "Uh":
        return LoopPoly.constant(np.zeros((d, d)), d)
    if kind == "Ah":
        return _v_ah(k1, k2)
    raise DomainError(f"unknown vertex {kind!r}")


def vertex(kind: str, k1, k2, p=None, h2_variant: str = "derived") -> np.ndarray:
    """Evaluate a Laplacian-action vertex at concrete leg momenta.

    ``k1``, ``k2`` are the incoming momenta of the two auxiliary-field legs.
    ``h2`` is only defined for legs (q, -q) and external momenta (p, -p);
    ``h2_variant="printed"`` selects the trace coefficient 1/4 instead of
    the re-derived 1/8.
    """
    if kind not in VERTEX_KINDS:
        raise DomainError(f"unknown vertex {kind!r}; expected one of {VERTEX_KINDS}")
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    d = k1.size
    a = LoopPoly.momentum(0.0, k1, d)
    b = LoopPoly.momentum(0.0, k2, d)
    if kind == "h2":
        if p is None or not np.allclose(k1, -k2, rtol=0.0, atol=1e-14 * max(1.0, float(np.abs(k1).max()))):
            raise UnsupportedKinematics("h2 is only available for legs (q, -q) with externals (p, -p)")
        if h2_variant not in H2_TRACE_TERM:
            raise DomainError(f"h2_variant must be one of {tuple(H2_TRACE_TERM)}")
        return _v_h2(a, np.asarray(p, dtype=float), h2_variant).at_zero_loop()
    return _vertex_poly(kind, a, b).at_zero_loop()


# ---------------------------------------------------------------------------
# diagram assembly


@dataclass(frozen=True)
class DiagramResult:
    """A normalized n-point function.

    Exactly one payload is set: ``scalar``, the pair ``pt_coeff``/``pl_coeff``,
    ``projector_coeffs`` or, for the mixed connection-metric channel, the raw
    rank-3 ``tensor``.
    """

    channel: str
    x: float
    s: float
    d: int
    scalar: float | None = None
    pt_coeff: float | None = None
    pl_coeff: float | None = None
    projector_coeffs: ProjectorCoefficients | None = None
    tensor: np.ndarray | None = field(default=None, repr=False)
    residual_norm: float = 0.0
    bundle_trace: str = "tr 1"
    normalization: str = "(4 pi s)^(-d/2)"


def momentum_for(x: float, s: float, d: int) -> np.ndarray:
    """A momentum in a fixed generic direction with s p^2 = x."""
    u = np.cos(1.3 * np.arange(1, d + 1) + 0.4)
    u /= np.linalg.norm(u)
    return math.sqrt(x / s) * u


def _sunset_ordered(kind_a: str, kind_b: str, p_a: np.ndarray, s: float, d: int) -> np.ndarray:
    """xi-polynomial of the loop-integrated product V_a (x) V_b for one ordering."""
    q = LoopPoly.momentum(1.0, p_a, d, (0.0, -1.0))
    qp = LoopPoly.momentum(1.0, p_a, d, (1.0, -1.0))
    va = _vertex_poly(kind_a, q, -qp)
    vb = _vertex_poly(kind_b, qp, -q)
    return integrate_loop(va, s, vb), va.out_rank, vb.out_rank


def _two_point_sunset(kind_x: str, kind_y: str, p: np.ndarray, s: float, d: int, rel_tol: float) -> np.ndarray:
    g12, mx, my = _sunset_ordered(kind_x, kind_y, p, s, d)
    g21, _, _ = _sunset_ordered(kind_y, kind_x, -p, s, d)
    # move Y indices behind X indices
    perm = [0] + list(range(1 + my, 1 + my + mx)) + list(range(1, 1 + my))
    g21 = g21.transpose(perm)
    n = max(g12.shape[0], g21.shape[0])
    total = np.zeros((n + 1,) + g12.shape[1:])
    total[: g12.shape[0]] += g12
    total[: g21.shape[0]] += g21
    weighted = total.copy()
    weighted[1:] -= total[:-1]
    return s * s * integrate_xi(weighted, s * float(p @ p), rel_tol)


def _tadpole(kind: str, p: np.ndarray, s: float, d: int, h2_variant: str) -> np.ndarray:
    q = LoopPoly.momentum(1.0, None, d)
    if kind == "h2":
        poly = _v_h2(q, p, h2_variant)
    else:
        poly = _vertex_poly(kind, q, -q)
    return integrate_loop(poly, s)[0]


def _kernel_one_point(kind: str, p: np.ndarray, s: float, d: int, rel_tol: float) -> np.ndarray:
    q = LoopPoly.momentum(1.0, p, d, (0.0, -1.0))
    qp = LoopPoly.momentum(1.0, p, d, (1.0, -1.0))
    poly = _vertex_poly(kind, q, -qp)
    return -s * integrate_xi(integrate_loop(poly, s), s * float(p @ p), rel_tol)


def _check_channel(channel: str) -> str:
    if channel not in CHANNELS:
        raise DomainError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    return channel


def _vector_result(channel, x, s, d, t, p) -> DiagramResult:
    c_t, c_l, res = decompose_vector(t, p)
    return DiagramResult(channel, x, s, d, pt_coeff=c_t, pl_coeff=c_l, residual_norm=res,
                         bundle_trace=_BUNDLE_TRACE[channel])


def npoint(channel: str, s: float, p=None, d: int | None = None, rel_tol: float = 1e-14,
           h2_variant: str = "derived") -> DiagramResult:
    """Evaluate a diagram channel at proper time ``s`` and external momentum ``p``.

    2-point channels take X at momentum p and Y at -p. Tensor channels are
    returned decomposed on the transverse/longitudinal or the six tensor
    projectors.
    """
    _check_channel(channel)
    if not s > 0:
        raise DomainError("proper time s must be positive")
    if p is None:
        if d is None:
            raise DomainError("either a momentum p or a dimension d is needed")
        if channel not in ("Tr0", "TrU", "Trh"):
            raise DomainError(f"channel {channel} needs an external momentum")
        p_dir = momentum_for(1.0, 1.0, d)
        p = np.zeros(d)
    else:
        p = np.asarray(p, dtype=float)
        if d is not None and p.size != d:
            raise DomainError(f"momentum has {p.size} components but d = {d}")
        d = p.size
        p_dir = p
    x = s * float(p @ p)
    if channel in ("Tr0", "TrU", "Trh"):
        # momentum conservation puts the single external line at zero momentum
        if channel == "Tr0":
            return DiagramResult(channel, 0.0, s, d, scalar=1.0, bundle_trace=_BUNDLE_TRACE[channel])
        if channel == "TrU":
            val = -s * float(_tadpole("U1", np.zeros(d), s, d, h2_variant))
            return DiagramResult(channel, 0.0, s, d, scalar=val, bundle_trace=_BUNDLE_TRACE[channel])
        t = -s * _tadpole("h1", np.zeros(d), s, d, h2_variant)
        return _vector_result(channel, 0.0, s, d, t, p_dir)

    if not x > 0:
        raise DomainError(f"channel {channel} needs a non-zero momentum")

    if channel == "K_U":
        val = float(_kernel_one_point("U1", p, s, d, rel_tol))
        return DiagramResult(channel, x, s, d, scalar=val, bundle_trace=_BUNDLE_TRACE[channel])
    if channel == "K_h":
        return _vector_result(channel, x, s, d, _kernel_one_point("h1", p, s, d, rel_tol), p)

    pairs = {"TrUU": ("U1", "U1", "U2"), "TrAA": ("A1", "A1", "A2"), "Trhh": ("h1", "h1", "h2"),
             "TrhU": ("h1", "U1", "Uh"), "TrAh": ("A1", "h1", "Ah")}
    kx, ky, k2 = pairs[channel]
    total = _two_point_sunset(kx, ky, p, s, d, rel_tol) - s * _tadpole(k2, p, s, d, h2_variant)
    if channel == "TrUU":
        return DiagramResult(channel, x, s, d, scalar=float(total), bundle_trace=_BUNDLE_TRACE[channel])
    if channel in ("TrAA", "TrhU"):
        return _vector_result(channel, x, s, d, total, p)
    if channel == "Trhh":
        coeffs = decompose(total, p)
        return DiagramResult(channel, x, s, d, projector_coeffs=coeffs, residual_norm=coeffs.residual_norm,
                             bundle_trace=_BUNDLE_TRACE[channel])
    return DiagramResult(channel, x, s, d, tensor=total, residual_norm=float(np.linalg.norm(total)),
                         bundle_trace=_BUNDLE_TRACE[channel])


# ---------------------------------------------------------------------------
# ansatz side


def _closed_form(name: str) -> Callable[[float], float]:
    return lambda x: evaluate(name, x)


def _ff(ffs, name: str) -> Callable[[float], float]:
    if ffs is None:
        return _closed_form(name)
    try:
        return ffs[name]
    except (KeyError, TypeError):
        if name in ("gu", "gr"):
            return _closed_form(name)
        raise


def ansatz_npoint(channel: str, s: float, p=None, d: int | None = None,
                  constants: Constants = EXACT_CONSTANTS, ffs=None) -> DiagramResult:
    """The same channel computed from the curvature-expansion ansatz.

    ``ffs`` maps slot names (``ric, r, ru, u, omega`` and optionally
    ``gu, gr``) to callables; it defaults to the closed-form factors.
    """
    _check_channel(channel)
    if p is None:
        if d is None:
            raise DomainError("either a momentum p or a dimension d is needed")
        p = np.zeros(d)
    p = np.asarray(p, dtype=float)
    d = p.size
    x = s * float(p @ p)
    g0, gu0, gr0 = constants.g0, constants.gU0, constants.gR0
    bt = _BUNDLE_TRACE[channel]
    if channel == "Tr0":
        return DiagramResult(channel, 0.0, s, d, scalar=g0, bundle_trace=bt)
    if channel == "TrU":
        return DiagramResult(channel, 0.0, s, d, scalar=s * gu0, bundle_trace=bt)
    if channel == "Trh":
        return DiagramResult(channel, 0.0, s, d, pt_coeff=g0 / 2, pl_coeff=g0 / 2, bundle_trace=bt)
    if channel == "TrUU":
        return DiagramResult(channel, x, s, d, scalar=2 * s * s * _ff(ffs, "u")(x), bundle_trace=bt)
    if channel == "TrAA":
        return DiagramResult(channel, x, s, d, pt_coeff=-4 * s * x * _ff(ffs, "omega")(x), pl_coeff=0.0,
                             bundle_trace=bt)
    if channel == "TrhU":
        return DiagramResult(channel, x, s, d, pl_coeff=gu0 * s / 2,
                             pt_coeff=gu0 * s / 2 + s * x * _ff(ffs, "ru")(x), bundle_trace=bt)
    if channel == "K_U":
        return DiagramResult(channel, x, s, d, scalar=s * _ff(ffs, "gu")(x), bundle_trace=bt)
    if channel == "K_h":
        return DiagramResult(channel, x, s, d, pt_coeff=g0 / 2 + x * _ff(ffs, "gr")(x), pl_coeff=g0 / 2,
                             bundle_trace=bt)
    if channel == "TrAh":
        return DiagramResult(channel, x, s, d, tensor=np.zeros((d, d, d)), bundle_trace=bt)
    f_ric = _ff(ffs, "ric")(x)
    f_r = _ff(ffs, "r")(x)
    root = math.sqrt(d - 1)
    coeffs = ProjectorCoefficients(
        c2=(-g0 / 2 - gr0 * x / 2 + x * x * f_ric / 2) if d > 2 else None,
        c1=-g0 / 2,
        cS=(d - 3) * g0 / 4 + (d - 2) * gr0 * x / 2 + d / 2 * x * x * f_ric + 2 * (d - 1) * x * x * f_r,
        cSsigma=root * g0 / 4,
        csigmaS=root * g0 / 4,
        csigma=-g0 / 4,
        residual_norm=0.0,
    )
    return DiagramResult(channel, x, s, d, projector_coeffs=coeffs, bundle_trace=bt)


def printed_trhh(x: float, d: int, f: float | None = None) -> ProjectorCoefficients:
    """Closed-form projector coefficients of the normalized graviton 2-point function."""
    f = evaluate("basic", x) if f is None else f
    root = math.sqrt(d - 1)
    return ProjectorCoefficients(
        c2=(-1 + f / 2) if d > 2 else None,
        c1=-0.5,
        cS=-1 - (d - 1) / 8 * x + (4 * (d + 1) + 4 * (d - 1) * x + (d - 1) * x * x) * f / 16,
        cSsigma=root / 4,
        csigmaS=root / 4,
        csigma=-0.25,
        residual_norm=0.0,
    )


def trhh_vertex_diagnostic(x: float, d: int, s: float = 1.0) -> dict:
    """Compare the graviton 2-point function built with each h2 variant to the closed form.

    Returns, per variant, the coefficient differences (assembled minus
    closed form) and the residual norm of the projector decomposition.
    """
    p = momentum_for(x, s, d)
    ref = printed_trhh(x, d).as_dict()
    out = {}
    for variant in H2_TRACE_TERM:
        res = npoint("Trhh", s, p, h2_variant=variant)
        got = res.projector_coeffs.as_dict()
        out[variant] = {
            "differences": {k: (None if ref[k] is None else got[k] - ref[k]) for k in ref},
            "residual_norm": res.residual_norm,
        }
    return out


# ---------------------------------------------------------------------------
# extraction


def extract_form_factors(channel: str, x: float, d: int, s: float = 1.0,
                         constants: Constants = EXACT_CONSTANTS, rel_tol: float = 1e-14) -> dict:
    """Solve diagram = ansatz for the form factors a channel determines.

    Returns a map from slot name to value; constants the channel fixes are
    included as ``g0`` or ``gU0``. In d = 2 the graviton channel only
    determines the combination ``r2d``.
    """
    _check_channel(channel)
    if channel not in ("TrUU", "TrAA", "Trhh", "TrhU", "K_U", "K_h"):
        raise DomainError(f"channel {channel} does not determine a form factor")
    if not x > 0:
        raise DomainError(f"extraction needs x > 0, got {x}")
    p = momentum_for(x, s, d)
    res = npoint(channel, s, p, rel_tol=rel_tol)
    x = res.x
    if channel == "TrUU":
        return {"u": res.scalar / (2 * s * s)}
    if channel == "TrAA":
        return {"omega": res.pt_coeff / (-4 * s * x), "longitudinal": res.pl_coeff}
    if channel == "K_U":
        return {"gu": res.scalar / s}
    if channel == "K_h":
        return {"gr": (res.pt_coeff - res.pl_coeff) / x, "g0": 2 * res.pl_coeff}
    if channel == "TrhU":
        gu0 = 2 * res.pl_coeff / s
        return {"ru": (res.pt_coeff - constants.gU0 * s / 2) / (s * x), "gU0": gu0}

    c = res.projector_coeffs
    g0, gr0 = constants.g0, constants.gR0
    out = {"g0": -2 * c.c1}
    rhs_s = c.cS - (d - 3) * g0 / 4 - (d - 2) * gr0 * x / 2
    if c.c2 is None:
        # d = 2: P_2 vanishes and only f_R + f_Ric/2 is determined
        out["r2d"] = rhs_s / (2 * (d - 1) * x * x)
        return out
    rhs_2 = c.c2 + g0 / 2 + gr0 * x / 2
    matrix = np.array([[x * x / 2, 0.0], [d / 2 * x * x, 2 * (d - 1) * x * x]])
    det = np.linalg.det(matrix)
    if not abs(det) > 1e-300 or np.linalg.cond(matrix) > 1e14:
        raise SingularSystem(f"graviton extraction system is singular at x = {x}, d = {d}")
    f_ric, f_r = np.linalg.solve(matrix, [rhs_2, rhs_s])
    out["ric"] = float(f_ric)
    out["r"] = float(f_r)
    return out


def _neville_at_zero(xs: Sequence[float], ys: Sequence[float]) -> float:
    xs = list(xs)
    table = list(ys)
    n = len(xs)
    for level in range(1, n):
        for i in range(n - level):
            table[i] = (xs[i + level] * table[i] - xs[i] * table[i + 1]) / (xs[i + level] - xs[i])
    return table[0]


def extract_constants(d: int = 4, s: float = 1.0, x0: float = 0.2, levels: int = 6) -> Constants:
    """Read g0, gU0 and gR0 off the diagrams.

    g0 and gU0 come from the 0- and 1-point trace functions; gR0 is the
    x -> 0 limit of the extracted g_R(x), obtained by polynomial
    extrapolation from a halving sequence of x values.
    """
    g0 = npoint("Tr0", s, d=d).scalar
    gu0 = npoint("TrU", s, d=d).scalar / s
    xs = [x0 / 2 ** k for k in range(levels)]
    ys = [extract_form_factors("K_h", xv, d, s)["gr"] for xv in xs]
    return Constants(g0=g0, gU0=gu0, gR0=float(_neville_at_zero(xs, ys)))
