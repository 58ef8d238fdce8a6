"""Zeros and critical points on S^1 (and on the interval D^1) by scan and bisection."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateSample
from ..polycore import PolynomialMap
from .charts import SCAN_PHASE, CirclePolyField, scan_angles
from .results import PointCloudResult

TANGENCY_TOL = 1e-13
BISECT_TOL = 1e-12


def scan_size(d: int) -> int:
    return 1024 + 64 * math.ceil(math.sqrt(d))


def _scan_values(field, n):
    if hasattr(field, "scan_matrix"):
        return field.scan_matrix(n) @ field.c
    return field.values(scan_angles(n))


def bisect(func, lo, hi, flo, tol=BISECT_TOL):
    """Vectorized bisection of sign changes on ``[lo, hi]`` intervals."""
    lo, hi = lo.astype(np.float64).copy(), hi.astype(np.float64).copy()
    slo = np.sign(flo)
    while len(lo) and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        fm = func(mid)
        left = np.sign(fm) == slo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def circle_roots(field, n=None, audit=True):
    """Angles in ``[0, 2 pi)`` where a circle field changes sign."""
    if n is None:
        n = scan_size(field.degree)
    f = _scan_values(field, n)
    if audit and np.any(np.abs(f) < TANGENCY_TOL):
        raise DegenerateSample("near-tangency on the angular scan",
                               min_abs=float(np.abs(f).min()))
    step = 2 * np.pi / n
    nxt = np.roll(f, -1)
    idx = np.nonzero(np.sign(f) != np.sign(nxt))[0]
    lo = (idx + SCAN_PHASE) * step
    roots = bisect(field.values, lo, lo + step, f[idx])
    return np.mod(roots, 2 * np.pi), n


def _as_circle_field(f):
    if isinstance(f, PolynomialMap):
        if f.m != 1 or f.k != 1:
            raise ValueError("need a scalar map on S^1 (m = k = 1)")
        return CirclePolyField(f)
    return f


def _result(theta, residuals, n, **flags):
    pts = np.column_stack([np.cos(theta), np.sin(theta)])
    return PointCloudResult(pts, np.abs(residuals), np.zeros(len(theta), dtype=np.int64),
                            np.ones(len(theta)), np.zeros(len(theta), dtype=np.int64),
                            dedup_radius=0.0, h=2 * np.pi / n, flags=dict(flags, angles=theta))


def find_zeros_circle(f, n=None) -> PointCloudResult:
    """All simple zeros on S^1 of a degree-d scalar map or circle field."""
    field = _as_circle_field(f)
    theta, n = circle_roots(field, n)
    return _result(theta, field.values(theta), n)


def circle_critical_points(f, minima=False, n=None) -> PointCloudResult:
    """Critical points (or minima) of ``theta -> P(cos theta, sin theta)``."""
    field = _as_circle_field(f)
    deriv = field.derivative()
    theta, n = circle_roots(deriv, n)
    if not len(theta):
        return _result(theta, np.zeros(0), n)
    _, d1, d2 = field.jet(theta)
    if minima:
        keep = d2 > 1e-9
        theta, d1, d2 = theta[keep], d1[keep], d2[keep]
    res = _result(theta, d1, n)
    res.conditions = np.ones(len(theta))
    res.flags["second_derivative"] = d2
    return res


def interval_roots(func, lo=-1.0, hi=1.0, n=4096, audit=True):
    """Sign changes of ``func`` on ``[lo, hi]`` (used for disk fields with m = 1)."""
    t = np.linspace(lo, hi, n + 1)
    f = func(t)
    if audit and np.any(np.abs(f) < TANGENCY_TOL):
        raise DegenerateSample("near-tangency on the interval scan")
    idx = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]
    return bisect(func, t[idx], t[idx + 1], f[idx])
