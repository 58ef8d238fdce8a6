"""Rescaled Kostlan fields on the unit disk and their Bargmann-Fock limit.

All fields here live on ``u in R^m`` and expose ``jet(u, r)`` returning
``(value, gradient, hessian)`` with shapes ``(N, k)``, ``(N, k, m)`` and
``(N, k, m, m)`` (``None`` above order ``r``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, log

import numpy as np

from .errors import OutOfDomain, SingularKernel, UnsupportedOrder
from .polycore import PolynomialMap, enumerate_multi_indices
from .seeding import philox

DOMAIN_RADIUS = 3.0
PSD_TOL = -1e-10
DEFAULT_RADIUS = 1.5
DEFAULT_EPS = 1e-6


def affine_exponents(m: int, D: int) -> np.ndarray:
    """Exponents ``beta`` in ``m`` variables with ``|beta| <= D``, by degree then graded-lex."""
    if m == 1:
        return np.arange(D + 1, dtype=np.int64)[:, None]
    return np.vstack([enumerate_multi_indices(m - 1, j) for j in range(D + 1)])


def _log_factorial_sum(exps):
    lg = np.vectorize(lgamma, otypes=[float])
    return lg(np.asarray(exps, dtype=np.float64) + 1.0).sum(axis=1)


class AffinePoly:
    """Dense affine polynomial map ``u -> sum_beta c_beta u^beta`` in ``R^k``."""

    def __init__(self, exps, coeffs):
        self.exps = np.asarray(exps, dtype=np.int64)
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.float64))
        self.k, self.m = self.coeffs.shape[0], self.exps.shape[1]
        self.degree = int(self.exps.sum(axis=1).max()) if len(self.exps) else 0
        self._deriv = None

    def _tables(self, u):
        return u[:, :, None] ** np.arange(self.degree + 1)

    def _mono(self, pw, e):
        out = pw[:, 0, e[:, 0]]
        for i in range(1, self.m):
            out = out * pw[:, i, e[:, i]]
        return out

    def _derivative_terms(self):
        # (exponent table, factor) for each first and second partial
        if self._deriv is None:
            first = []
            for i in range(self.m):
                e = self.exps.copy()
                f = e[:, i].astype(np.float64)
                e[:, i] = np.maximum(e[:, i] - 1, 0)
                first.append((e, f))
            second = {}
            for i in range(self.m):
                for j in range(i, self.m):
                    e, f = first[i][0].copy(), first[i][1].copy()
                    f = f * e[:, j]
                    e[:, j] = np.maximum(e[:, j] - 1, 0)
                    second[i, j] = (e, f)
            self._deriv = (first, second)
        return self._deriv

    def jet(self, u, r=0):
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        if self.m == 2 and len(u) > 1:
            return self._jet2(u, r)
        pw = self._tables(u)
        val = self._mono(pw, self.exps) @ self.coeffs.T
        grad = hess = None
        if r >= 1:
            first, second = self._derivative_terms()
            grad = np.stack([(self._mono(pw, e) * f) @ self.coeffs.T for e, f in first], axis=-1)
        if r >= 2:
            hess = np.empty((len(u), self.k, self.m, self.m))
            for (i, j), (e, f) in second.items():
                hess[:, :, i, j] = hess[:, :, j, i] = (self._mono(pw, e) * f) @ self.coeffs.T
        return val, grad, hess

    def _square(self):
        # coefficients as a (k, n, n) table indexed by the two exponents
        if getattr(self, "_C", None) is None:
            n = self.degree + 1
            C = np.zeros((self.k, n, n))
            C[:, self.exps[:, 0], self.exps[:, 1]] = self.coeffs
            self._C = C
        return self._C

    def _powers(self, t, r):
        # t^p and its first r derivatives in t, each (len(t), n)
        p = np.arange(self.degree + 1, dtype=np.float64)
        out = [t[:, None] ** p]
        if r >= 1:
            out.append(p * t[:, None] ** np.maximum(p - 1, 0))
        if r >= 2:
            out.append(p * (p - 1) * t[:, None] ** np.maximum(p - 2, 0))
        return out

    def _jet2(self, u, r):
        C = self._square()
        k, n = self.k, self.degree + 1
        A = self._powers(u[:, 0], r)
        B = self._powers(u[:, 1], r)
        # T[i][pt, k, q] = sum_p A[i][pt, p] C[k, p, q]
        flat = C.transpose(1, 0, 2).reshape(n, k * n)
        T = [(a @ flat).reshape(len(u), k, n) for a in A]

        def pair(i, j):
            return np.einsum("skq,sq->sk", T[i], B[j])

        val = pair(0, 0)
        grad = hess = None
        if r >= 1:
            grad = np.stack([pair(1, 0), pair(0, 1)], axis=-1)
        if r >= 2:
            hess = np.empty((len(u), k, 2, 2))
            hess[:, :, 0, 0] = pair(2, 0)
            hess[:, :, 1, 1] = pair(0, 2)
            hess[:, :, 0, 1] = hess[:, :, 1, 0] = pair(1, 1)
        return val, grad, hess

    def grid(self, ta, tb):
        """Values on the tensor grid ``ta x tb`` (m = 2) as a ``(k, na, nb)`` array."""
        if self.m != 2:
            raise ValueError("tensor grids need m = 2")
        n = self.degree + 1
        Va = np.asarray(ta, dtype=np.float64)[:, None] ** np.arange(n)
        Vb = np.asarray(tb, dtype=np.float64)[:, None] ** np.arange(n)
        return np.einsum("ap,kpq,bq->kab", Va, self._square(), Vb, optimize=True)


class DiskField:
    """Common interface; subclasses implement ``_jet``."""

    m: int
    k: int
    feature_scale = 1.0
    tensor_grid = False  # subclasses whose _jet is exactly self._poly.jet

    def jet(self, u, r=0):
        if r not in (0, 1, 2):
            raise UnsupportedOrder(f"jet order {r} not in (0, 1, 2)")
        return self._jet(np.atleast_2d(np.asarray(u, dtype=np.float64)), r)

    def grid_values(self, ta, tb):
        """``(k, na, nb)`` values on a tensor grid (m = 2)."""
        if self.tensor_grid and self.m == 2:
            return self._poly.grid(ta, tb)
        A, B = np.meshgrid(ta, tb, indexing="ij")
        v = self.jet(np.column_stack([A.ravel(), B.ravel()]), 0)[0]
        return v.T.reshape(self.k, len(ta), len(tb))

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        val = self.jet(u, 0)[0]
        return val[0] if u.ndim == 1 else val


# ---------------------------------------------------------------- X_d

class RescaledField(DiskField):
    """``X_d(u) = P(1, u / sqrt(d))`` for a homogeneous map ``P``."""

    def __init__(self, source: PolynomialMap):
        self.source = source
        self.m, self.k, self.d = source.m, source.k, source.d
        exps = source.exponents
        tail = exps[:, 1:]
        scale = np.exp(-0.5 * tail.sum(axis=1) * log(self.d))
        self._poly = AffinePoly(tail, source.coefficients * scale)

    def _jet(self, u, r):
        if np.any(np.einsum("ij,ij->i", u, u) > DOMAIN_RADIUS**2 * (1 + 1e-12)):
            raise OutOfDomain(f"|u| must be <= {DOMAIN_RADIUS}")
        return self._poly.jet(u, r)


def rescaled_jet(X: RescaledField, u, r=2):
    return X.jet(u, r)


# ---------------------------------------------------------------- X_infinity

def truncation_order(radius: float, eps: float, m: int, k: int = 1) -> int:
    """Smallest ``D`` with ``sum_{j>D} (m rho^2)^j / j! < eps^2``.

    The tail is summed directly (never as ``e^x`` minus a partial sum).
    """
    if radius <= 0 or not 0 < eps < 1:
        raise ValueError("need radius > 0 and 0 < eps < 1")
    x = m * radius * radius
    terms = [1.0]
    j = 0
    while j < 10 * x + 50 or terms[-1] > 1e-300:
        j += 1
        terms.append(terms[-1] * x / j)
        if terms[-1] == 0.0:
            break
    tails = np.cumsum(np.asarray(terms)[::-1])[::-1]  # tails[i] = sum_{j>=i}
    target = eps * eps
    for D in range(len(terms)):
        if D + 1 >= len(tails) or tails[D + 1] < target:
            return D
    return len(terms)


class BargmannFockField(DiskField):
    """Truncated ``X_inf(u) = sum_beta xi_beta u^beta`` with ``Var xi_beta = 1/beta!``."""

    tensor_grid = True

    def __init__(self, m, k, D, coefficients):
        self.m, self.k, self.D = m, k, D
        self.exps = affine_exponents(m, D)
        self.coefficients = np.asarray(coefficients, dtype=np.float64).reshape(k, len(self.exps))
        self._poly = AffinePoly(self.exps, self.coefficients)

    @classmethod
    def sample(cls, m, k, seed, D=None):
        if D is None:
            D = truncation_order(DEFAULT_RADIUS, DEFAULT_EPS, m, k)
        pair = sample_coupled(m, k, D, seed)
        return pair.view(None)

    def _jet(self, u, r):
        return self._poly.jet(u, r)


# ---------------------------------------------------------------- coupled pair

def coupled_weights(exps, d) -> np.ndarray:
    """Series weights for the view ``d`` (``None`` meaning infinity).

    ``sqrt(d! / (beta! (d-|beta|)!)) d^{-|beta|/2}`` for ``|beta| <= d``, else 0;
    the limit view uses ``1 / sqrt(beta!)``.
    """
    lf = _log_factorial_sum(exps)
    if d is None:
        return np.exp(-0.5 * lf)
    deg = exps.sum(axis=1)
    w = np.zeros(len(exps))
    ok = deg <= d
    lg = np.vectorize(lgamma, otypes=[float])
    logw = 0.5 * (lgamma(d + 1.0) - lf[ok] - lg(d - deg[ok] + 1.0)) - 0.5 * deg[ok] * log(d)
    w[ok] = np.exp(logw)
    return w


@dataclass(frozen=True, eq=False)
class CoupledPair:
    """Shared standard Gaussian table ``gamma_beta`` for ``|beta| <= D``."""

    m: int
    k: int
    D: int
    gamma: np.ndarray = field(repr=False)

    @property
    def exps(self):
        return affine_exponents(self.m, self.D)

    def view(self, d=None) -> DiskField:
        """The field ``X~_d`` (or ``X~_inf`` for ``d=None``) read from the table."""
        return CoupledView(self, d)


class CoupledView(DiskField):
    tensor_grid = True

    def __init__(self, pair: CoupledPair, d):
        if d is not None and (d != int(d) or d < 1):
            raise ValueError("d must be a positive integer or None")
        self.pair, self.d = pair, (None if d is None else int(d))
        self.m, self.k = pair.m, pair.k
        exps = pair.exps
        w = coupled_weights(exps, self.d)
        keep = w > 0
        self._poly = AffinePoly(exps[keep], pair.gamma[:, keep] * w[keep])

    def _jet(self, u, r):
        return self._poly.jet(u, r)


def sample_coupled(m, k, D, seed) -> CoupledPair:
    if D < 1:
        raise ValueError("truncation order D must be >= 1")
    n = len(affine_exponents(m, D))
    g = np.vstack([philox(seed, j).standard_normal(n) for j in range(k)])
    g.setflags(write=False)
    return CoupledPair(m, k, D, g)


def eval_coupled(pair: CoupledPair, d, u, r=0):
    if r > 1:
        raise UnsupportedOrder("coupled evaluation supports r <= 1")
    return pair.view(d).jet(u, r)


# ---------------------------------------------------------------- Y fields

class WeightedField(DiskField):
    """``Y = w(u) X`` with ``w = (1+|u|^2/d)^{-d/2}`` or ``exp(-|u|^2/2)``."""

    def __init__(self, base: DiskField, d=None):
        self.base, self.m, self.k = base, base.m, base.k
        self.d = getattr(base, "d", None) if d is None else d

    def weight_jet(self, u):
        s = np.einsum("ij,ij->i", u, u)
        if self.d is None:
            w = np.exp(-0.5 * s)
            dw = -u * w[:, None]
            ddw = (u[:, :, None] * u[:, None, :] - np.eye(self.m)) * w[:, None, None]
        else:
            d = self.d
            t = 1.0 + s / d
            w = t ** (-d / 2)
            w1 = t ** (-d / 2 - 1)
            dw = -u * w1[:, None]
            ddw = (-np.eye(self.m) * w1[:, None, None]
                   + (d + 2) / d * u[:, :, None] * u[:, None, :] * (t ** (-d / 2 - 2))[:, None, None])
        return w, dw, ddw

    def _jet(self, u, r):
        val, grad, hess = self.base.jet(u, r)
        w, dw, ddw = self.weight_jet(u)
        out_v = val * w[:, None]
        out_g = out_h = None
        if r >= 1:
            out_g = grad * w[:, None, None] + val[:, :, None] * dw[:, None, :]
        if r >= 2:
            out_h = (hess * w[:, None, None, None]
                     + grad[:, :, :, None] * dw[:, None, None, :]
                     + dw[:, None, :, None] * grad[:, :, None, :]
                     + val[:, :, None, None] * ddw[:, None, :, :])
        return out_v, out_g, out_h


def weighted_field_Y(field: DiskField, d=None) -> WeightedField:
    return WeightedField(field, d)


# ---------------------------------------------------------------- kernels

KERNEL_KINDS = ("rescaled-kostlan", "bargmann-fock", "weighted-Y")


@dataclass(frozen=True)
class KernelSpec:
    """Covariance kernel of a field; ``d=None`` is the Bargmann-Fock limit."""

    kind: str
    d: int | None = None
    m: int = 1
    k: int = 1

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rescaled-kostlan" and self.d is None:
            raise ValueError("rescaled-kostlan needs a finite degree")
        if self.kind == "bargmann-fock" and self.d is not None:
            raise ValueError("bargmann-fock has no degree")

    @property
    def weighted(self):
        return self.kind == "weighted-Y"

    def profile(self, s):
        """``phi(s), phi'(s), phi''(s)`` where ``K = w(u) w(v) phi(u.v)``."""
        if self.d is None:
            e = np.exp(s)
            return e, e, e
        d = self.d
        base = np.log1p(s / d)
        return (np.exp(d * base), np.exp((d - 1) * base),
                (d - 1) / d * np.exp((d - 2) * base))

    def weight(self, u):
        u = np.atleast_2d(u)
        s = np.einsum("ij,ij->i", u, u)
        if not self.weighted:
            return np.ones_like(s), np.zeros_like(u)
        if self.d is None:
            w = np.exp(-0.5 * s)
            return w, -u * w[:, None]
        t = 1.0 + s / self.d
        return t ** (-self.d / 2), -u * (t ** (-self.d / 2 - 1))[:, None]

    def __call__(self, u, v):
        """Scalar kernel ``K(u, v)`` (the matrix kernel is this times ``I_k``)."""
        u, v = np.atleast_2d(u), np.atleast_2d(v)
        phi = self.profile(np.einsum("ij,ij->i", u, v))[0]
        return phi * self.weight(u)[0] * self.weight(v)[0]


def kernel_jet_covariance(spec: KernelSpec, u, r: int = 1) -> np.ndarray:
    """Covariance of ``(X_j, d_1 X_j, ..., d_m X_j)_j`` at ``u``; size ``k(1+m)``.

    Blocks are ordered by component; different components are independent.
    """
    if r not in (0, 1):
        raise UnsupportedOrder("kernel jets are available for r <= 1")
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    m = len(u)
    s = float(u @ u)
    phi, dphi, ddphi = (float(np.asarray(a)) for a in spec.profile(np.array(s)))
    w, dw = (a[0] for a in spec.weight(u[None]))
    w = float(w)
    if r == 0:
        C = np.array([[w * w * phi]])
    else:
        C = np.empty((1 + m, 1 + m))
        C[0, 0] = w * w * phi
        # d/dv_j K at v = u
        cross = w * (dw * phi + w * dphi * u)
        C[0, 1:] = C[1:, 0] = cross
        C[1:, 1:] = (np.outer(dw, dw) * phi
                     + dphi * w * (np.outer(dw, u) + np.outer(u, dw))
                     + w * w * (ddphi * np.outer(u, u) + dphi * np.eye(m)))
        C = 0.5 * (C + C.T)
    full = np.kron(np.eye(spec.k), C)
    ev = np.linalg.eigvalsh(full)
    if ev.min() < PSD_TOL:
        raise SingularKernel(f"jet covariance has eigenvalue {ev.min():.3g}")
    return full
