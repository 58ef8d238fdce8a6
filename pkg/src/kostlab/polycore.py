"""Homogeneous polynomial maps on spheres: multi-indices, Kostlan sampling, jets.

Coefficients are stored densely, one row per component, indexed by the
graded-lex enumeration of exponents with ``|alpha| = d``.  Within a single
degree that order is descending lexicographic, e.g. ``(2,0), (1,1), (0,2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, lgamma

import numpy as np

from .errors import NonUnitInput, UnsupportedOrder
from .seeding import philox

UNIT_TOL = 1e-9
_CHUNK = 1 << 22  # max monomial-table entries evaluated at once


# ---------------------------------------------------------------- multi-indices

@lru_cache(maxsize=256)
def _enumerate(m, d):
    if m == 0:
        return np.array([[d]], dtype=np.int64)
    rows = []
    for first in range(d, -1, -1):
        tail = _enumerate(m - 1, d - first)
        rows.append(np.column_stack([np.full(len(tail), first, dtype=np.int64), tail]))
    out = np.vstack(rows)
    out.setflags(write=False)
    return out


def enumerate_multi_indices(m: int, d: int) -> np.ndarray:
    """All exponents of degree ``d`` in ``m + 1`` variables, graded-lex order.

    Returns a read-only ``(C(m+d, m), m+1)`` integer array.
    """
    if m < 0 or d < 0:
        raise ValueError("m and d must be non-negative")
    return _enumerate(m, d)


def index_of(alpha) -> int:
    """Position of ``alpha`` in ``enumerate_multi_indices(len(alpha)-1, sum(alpha))``."""
    alpha = [int(a) for a in alpha]
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    rest = sum(alpha)
    pos = 0
    nvars = len(alpha)
    for i, a in enumerate(alpha[:-1]):
        left = nvars - i - 1  # variables after position i
        # entries whose i-th exponent exceeds a come first
        for v in range(rest, a, -1):
            pos += comb(rest - v + left - 1, left - 1)
        rest -= a
    return pos


def log_multinomial(alpha) -> np.ndarray:
    """``log(|alpha|! / prod alpha_i!)`` along the last axis, via log-gamma."""
    a = np.asarray(alpha, dtype=np.float64)
    lg = np.vectorize(lgamma, otypes=[float])
    return lg(a.sum(axis=-1) + 1.0) - lg(a + 1.0).sum(axis=-1)


def multinomial(alpha) -> np.ndarray:
    return np.exp(log_multinomial(alpha))


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class KostlanSpec:
    m: int
    k: int
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.m < 1 or self.k < 1:
            raise ValueError(f"invalid Kostlan type (d={self.d}, m={self.m}, k={self.k})")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class PolynomialMap:
    """``k`` homogeneous degree-``d`` polynomials in ``m + 1`` variables."""

    m: int
    k: int
    d: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.float64, ndmin=2)
        n = comb(self.m + self.d, self.m)
        if c.shape != (self.k, n):
            raise ValueError(f"coefficients must have shape ({self.k}, {n}), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def exponents(self) -> np.ndarray:
        return enumerate_multi_indices(self.m, self.d)

    @classmethod
    def from_terms(cls, m, d, terms, k=1):
        """Build from ``{alpha: coefficient}`` (scalar) or ``{alpha: sequence of k}``."""
        c = np.zeros((k, comb(m + d, m)))
        for alpha, val in terms.items():
            if len(alpha) != m + 1 or sum(alpha) != d:
                raise ValueError(f"exponent {alpha} is not of degree {d} in {m + 1} variables")
            c[:, index_of(alpha)] += np.broadcast_to(val, (k,))
        return cls(m, k, d, c)

    def component(self, j) -> "PolynomialMap":
        return PolynomialMap(self.m, 1, self.d, self.coefficients[j:j + 1])

    def stack(self, other) -> "PolynomialMap":
        if (other.m, other.d) != (self.m, self.d):
            raise ValueError("can only stack maps of equal type")
        return PolynomialMap(self.m, self.k + other.k, self.d,
                             np.vstack([self.coefficients, other.coefficients]))

    def __call__(self, x):
        return evaluate_map(self, x)


def kostlan_std(m, d) -> np.ndarray:
    """Standard deviations ``sqrt(d!/alpha!)`` in enumeration order."""
    return np.exp(0.5 * log_multinomial(enumerate_multi_indices(m, d)))


def sample_kostlan(spec: KostlanSpec) -> PolynomialMap:
    """Draw one Kostlan map.  Component ``j`` reads Philox stream ``(seed, j)``."""
    std = kostlan_std(spec.m, spec.d)
    c = np.empty((spec.k, len(std)))
    for j in range(spec.k):
        c[j] = philox(spec.seed, j).standard_normal(len(std)) * std
    return PolynomialMap(spec.m, spec.k, spec.d, c)


def sample_kostlan_batch(spec: KostlanSpec, trials: int) -> np.ndarray:
    """``(trials, k, n)`` coefficient tensor from a single dedicated stream.

    Cheaper than ``trials`` calls to :func:`sample_kostlan` when only
    distributional statistics are needed.
    """
    std = kostlan_std(spec.m, spec.d)
    rng = philox(spec.seed, 0x6B6F73)
    return rng.standard_normal((trials, spec.k, len(std))) * std


# ---------------------------------------------------------------- evaluation

def _as_points(x, m, check_unit=True):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != m + 1:
        raise ValueError(f"points must have {m + 1} coordinates")
    if check_unit:
        dev = np.abs(np.einsum("ij,ij->i", x, x) - 1.0)
        if dev.size and dev.max() > UNIT_TOL:
            raise NonUnitInput(f"|x|^2 deviates from 1 by {dev.max():.3g}")
    return x, single


def monomials(x, exps) -> np.ndarray:
    """``x^alpha`` for each row of ``x`` and each exponent row, via power tables."""
    x = np.atleast_2d(x)
    d = int(exps.sum(axis=1).max()) if len(exps) else 0
    pw = x[:, :, None] ** np.arange(d + 1)  # (N, m+1, d+1)
    out = pw[:, 0, exps[:, 0]]
    for v in range(1, exps.shape[1]):
        out = out * pw[:, v, exps[:, v]]
    return out


def _chunks(npts, nmono):
    step = max(1, _CHUNK // max(nmono, 1))
    for s in range(0, npts, step):
        yield slice(s, min(npts, s + step))


def evaluate_map(P: PolynomialMap, x, check_unit=True) -> np.ndarray:
    """Values ``P(x)`` at unit vector(s) ``x``: shape ``(k,)`` or ``(N, k)``."""
    x, single = _as_points(x, P.m, check_unit)
    exps = P.exponents
    out = np.empty((len(x), P.k))
    for sl in _chunks(len(x), len(exps)):
        out[sl] = monomials(x[sl], exps) @ P.coefficients.T
    return out[0] if single else out


@lru_cache(maxsize=128)
def _derivative_operator(m, d):
    """Map degree-``d`` coefficients to each partial derivative's coefficients.

    Returns ``(rows, cols, factors)`` per variable so that the partial in
    variable ``v`` has coefficient ``factors[v] * c[cols[v]]`` at degree-``d-1``
    position ``rows[v]``.
    """
    exps = enumerate_multi_indices(m, d)
    ops = []
    for v in range(m + 1):
        sel = np.nonzero(exps[:, v] > 0)[0]
        lower = exps[sel].copy()
        lower[:, v] -= 1
        rows = np.array([index_of(a) for a in lower], dtype=np.int64)
        ops.append((rows, sel, exps[sel, v].astype(np.float64)))
    return ops


def differentiate(P: PolynomialMap, v: int) -> PolynomialMap:
    """Partial derivative in variable ``v``; a zero map of degree 0 when ``d == 0``."""
    if P.d == 0:
        return PolynomialMap(P.m, P.k, 0, np.zeros((P.k, 1)))
    rows, cols, fac = _derivative_operator(P.m, P.d)[v]
    c = np.zeros((P.k, comb(P.m + P.d - 1, P.m)))
    c[:, rows] = P.coefficients[:, cols] * fac
    return PolynomialMap(P.m, P.k, P.d - 1, c)


@lru_cache(maxsize=64)
def _gradient_matrix(m, d):
    """``(m+1, n_d, n_{d-1})`` stacked derivative operators as dense matrices."""
    nd, nl = comb(m + d, m), comb(m + d - 1, m)
    G = np.zeros((m + 1, nd, nl))
    for v, (rows, cols, fac) in enumerate(_derivative_operator(m, d)):
        G[v, cols, rows] = fac
    return G


def ambient_derivatives(P: PolynomialMap, x, order=2, check_unit=True):
    """Value, ambient gradient and ambient Hessian of every component.

    Shapes for ``N`` points: ``(N, k)``, ``(N, k, m+1)``, ``(N, k, m+1, m+1)``.
    Entries above ``order`` are returned as ``None``.
    """
    if order not in (0, 1, 2):
        raise UnsupportedOrder(f"order {order} not in (0, 1, 2)")
    x, _ = _as_points(x, P.m, check_unit)
    m, k, d = P.m, P.k, P.d
    val = evaluate_map(P, x, check_unit=False)
    grad = hess = None
    if order >= 1:
        if d == 0:
            grad = np.zeros((len(x), k, m + 1))
        else:
            G = _gradient_matrix(m, d)
            dc = np.einsum("kn,vnl->kvl", P.coefficients, G)  # (k, m+1, n_{d-1})
            mono = monomials(x, enumerate_multi_indices(m, d - 1))
            grad = np.einsum("nl,kvl->nkv", mono, dc)
    if order >= 2:
        if d <= 1:
            hess = np.zeros((len(x), k, m + 1, m + 1))
        else:
            G1 = _gradient_matrix(m, d)
            G2 = _gradient_matrix(m, d - 1)
            dc = np.einsum("kn,vnl,wlq->kvwq", P.coefficients, G1, G2)
            mono = monomials(x, enumerate_multi_indices(m, d - 2))
            hess = np.einsum("nq,kvwq->nkvw", mono, dc)
            hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return val, grad, hess


# ---------------------------------------------------------------- spherical jets

def tangent_frame(x) -> np.ndarray:
    """Orthonormal basis of the tangent space at unit ``x``, as ``(m, m+1)`` rows.

    Rows 1..m of the Householder reflection sending ``e_0`` to ``±x``.
    """
    x = np.asarray(x, dtype=np.float64)
    s = 1.0 if x[0] >= 0 else -1.0
    v = x.copy()
    v[0] += s
    H = np.eye(len(x)) - 2.0 * np.outer(v, v) / (v @ v)
    return H[1:].copy()


@dataclass(frozen=True, eq=False)
class SphericalJet:
    x: np.ndarray
    frame: np.ndarray  # (m, m+1), rows are tangent vectors
    value: np.ndarray  # (k,)
    gradient: np.ndarray | None  # (k, m)
    hessian: np.ndarray | None  # (k, m, m)
    order: int


def spherical_jet(P: PolynomialMap, x, r: int = 2, frame=None) -> SphericalJet:
    """r-jet of ``P`` restricted to the sphere at ``x``, in an orthonormal frame.

    Gradient is ``grad P`` projected on the frame; Hessian is
    ``E^T (hess P - (x . grad P) I) E``.
    """
    if r not in (0, 1, 2):
        raise UnsupportedOrder(f"jet order {r} > 2 is not supported")
    x, _ = _as_points(x, P.m)
    x = x[0]
    E = tangent_frame(x) if frame is None else np.asarray(frame, dtype=np.float64)
    val, grad, hess = ambient_derivatives(P, x, order=r, check_unit=False)
    g = h = None
    if r >= 1:
        g = grad[0] @ E.T
    if r >= 2:
        radial = grad[0] @ x  # Euler: equals d * value
        h = np.einsum("ia,kab,jb->kij", E, hess[0], E) - radial[:, None, None] * np.eye(P.m)
        h = 0.5 * (h + np.swapaxes(h, -1, -2))
    return SphericalJet(x=x, frame=E, value=val[0], gradient=g, hessian=h, order=r)


# ---------------------------------------------------------------- covariance

def empirical_covariance(spec: KostlanSpec, x, y, trials: int):
    """Monte Carlo ``E[P(x) P(y)^T]`` with per-entry standard errors."""
    if trials < 100:
        raise ValueError("trials must be >= 100")
    xs, _ = _as_points(np.vstack([x, y]), spec.m)
    mono = monomials(xs, enumerate_multi_indices(spec.m, spec.d))  # (2, n)
    out = np.zeros((trials, 2, spec.k))
    step = max(1, _CHUNK // (spec.k * mono.shape[1]))
    rng = philox(spec.seed, 0x636F76)
    std = kostlan_std(spec.m, spec.d)
    for s in range(0, trials, step):
        t = min(trials, s + step) - s
        c = rng.standard_normal((t, spec.k, len(std))) * std
        out[s:s + t] = np.einsum("tkn,pn->tpk", c, mono)
    prod = out[:, 0, :, None] * out[:, 1, None, :]
    return prod.mean(axis=0), prod.std(axis=0, ddof=1) / np.sqrt(trials)


# ---------------------------------------------------------------- text dump

def dump_map(P: PolynomialMap, path) -> None:
    """One line per monomial: exponents then the k coefficients (17 digits)."""
    with open(path, "w") as fh:
        for alpha, col in zip(P.exponents, P.coefficients.T):
            fh.write(" ".join(map(str, alpha)) + " " + " ".join(f"{c:.17g}" for c in col) + "\n")


def load_map(path, m: int, k: int) -> PolynomialMap:
    rows = np.loadtxt(path, ndmin=2)
    exps = rows[:, :m + 1].astype(np.int64)
    d = int(exps[0].sum())
    terms = {tuple(a): row for a, row in zip(exps, rows[:, m + 1:])}
    return PolynomialMap.from_terms(m, d, terms, k=k)
