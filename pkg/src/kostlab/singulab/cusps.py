"""Whitney cusps of planar maps: sign changes of the kernel derivative along folds.

On a fold point ``dpsi`` has rank one with kernel line ``v``.  The cusp
indicator ``c = D_v (det dpsi)`` vanishes exactly at cusps, so after fixing
a continuous orientation of ``v`` along each fold polyline the cusps are the
sign changes of ``c``.  Only first-order jets of the fold residual are used.
"""
from __future__ import annotations

import numpy as np

from ..errors import DegenerateSample
from ..polycore import PolynomialMap
from . import charts as ch
from .catalog import FoldCurve
from .circle import bisect
from .curves import extract_zero_curve, project_plane, project_sphere
from .points import _dedup
from .results import PointCloudResult, empty_points

KERNEL_TOL = 1e-10
CUSP_TOL = 1e-10


class _SphereFold:
    """Kernel direction and cusp indicator for a planar map on S^2."""

    dim = 3

    def __init__(self, P: PolynomialMap):
        self.field = ch.SpherePolyField(P)
        self.fold = ch.FoldField(self.field)

    def project(self, x, h):
        return project_sphere(self.fold, x / np.linalg.norm(x, axis=1, keepdims=True), h)[0]

    def kernel_and_c(self, x):
        _, G, H = self.field.ambient_jet(x, 2)
        a, b = G[:, 0], G[:, 1]
        g = np.einsum("ij,ij->i", x, np.cross(a, b))
        grad = (np.cross(a, b) + np.einsum("nij,nj->ni", H[:, 0], np.cross(b, x))
                + np.einsum("nij,nj->ni", H[:, 1], np.cross(x, a)))
        ta = a - np.einsum("ij,ij->i", a, x)[:, None] * x
        tb = b - np.einsum("ij,ij->i", b, x)[:, None] * x
        na, nb = np.linalg.norm(ta, axis=1), np.linalg.norm(tb, axis=1)
        if np.any(np.maximum(na, nb) < KERNEL_TOL):
            raise DegenerateSample("fold point with a two-dimensional kernel")
        t = np.where((na >= nb)[:, None], ta, tb)
        v = np.cross(x, t)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return v, np.einsum("ij,ij->i", grad, v), g


class _DiskFold:
    dim = 2

    def __init__(self, field):
        self.fold = ch.DiskFold(field)
        self.field = field

    def project(self, u, h):
        return project_plane(self.fold, u, h)[0]

    def kernel_and_c(self, u):
        g, grad = self.fold.value_grad(u)
        _, J, _ = self.field.jet(u, 1)
        n0, n1 = np.linalg.norm(J[:, 0], axis=1), np.linalg.norm(J[:, 1], axis=1)
        if np.any(np.maximum(n0, n1) < KERNEL_TOL):
            raise DegenerateSample("fold point with a two-dimensional kernel")
        row = np.where((n0 >= n1)[:, None], J[:, 0], J[:, 1])
        v = np.column_stack([-row[:, 1], row[:, 0]]) / np.maximum(n0, n1)[:, None]
        return v, np.einsum("ij,ij->i", grad, v), g


def _aligned(v):
    """Flip kernel vectors so consecutive ones point the same way."""
    s = np.sign(np.einsum("ij,ij->i", v[1:], v[:-1]))
    s[s == 0] = 1.0
    flips = np.concatenate([[1.0], np.cumprod(s)])
    return v * flips[:, None], flips


def _cusps_on_folds(model, curve, h):
    p0s, p1s, refs, clos = [], [], [], []
    for poly in curve.polylines:
        if len(poly) < 2:
            continue
        v, c, _ = model.kernel_and_c(poly)
        _, flips = _aligned(v)
        c = c * flips
        sgn = c >= 0
        idx = np.nonzero(sgn[:-1] != sgn[1:])[0]
        p0s.append(poly[idx])
        p1s.append(poly[idx + 1])
        refs.append(v[idx] * flips[idx, None])
        clos.append(c[idx])
    if not p0s or not sum(len(p) for p in p0s):
        return np.zeros((0, model.dim)), 0
    p0, p1, ref, clo = (np.concatenate(a) for a in (p0s, p1s, refs, clos))

    def at(s):
        pts = model.project(p0 + s[:, None] * (p1 - p0), h)
        v, c, _ = model.kernel_and_c(pts)
        flip = np.where(np.einsum("ij,ij->i", v, ref) < 0, -1.0, 1.0)
        return pts, c * flip

    seg = np.linalg.norm(p1 - p0, axis=1).max()
    tol = CUSP_TOL / max(seg, 1e-300)
    s = bisect(lambda s: at(s)[1], np.zeros(len(p0)), np.ones(len(p0)), clo, tol=tol)
    pts, _ = at(s)
    return pts, len(p0)


def find_cusps(psi, h=None, radius=1.0) -> PointCloudResult:
    """Cusp points of a planar map on S^2 (``PolynomialMap``) or on D^2 (disk field)."""
    if isinstance(psi, PolynomialMap):
        if psi.m != 2 or psi.k != 2:
            raise ValueError("cusps need a planar map with m = k = 2")
        model = _SphereFold(psi)
        curve = extract_zero_curve(model.fold, h=h)
    else:
        model = _DiskFold(psi)
        curve = extract_zero_curve(model.fold, h=h, radius=radius)
    h = curve.h
    pts, n_changes = _cusps_on_folds(model, curve, h)
    if curve.domain == "disk" and len(pts):
        pts = pts[np.linalg.norm(pts, axis=1) <= radius]
    if not len(pts):
        return empty_points(model.dim, h, h / 4, fold_components=curve.b0)
    pts = pts[_dedup(pts, h / 4)]
    _, c, g = model.kernel_and_c(pts)
    res = np.hypot(g, c)
    charts = ch.owner_face(pts) if model.dim == 3 else np.zeros(len(pts), dtype=np.int64)
    return PointCloudResult(pts, np.abs(g), np.zeros(len(pts), dtype=np.int64),
                            np.ones(len(pts)), charts, h / 4, h,
                            {"fold_components": curve.b0, "sign_changes": n_changes,
                             "indicator": res})


def fold_curve(psi, h=None, radius=1.0):
    """Fold locus of a planar map as a ``CurveResult``."""
    return extract_zero_curve(psi, FoldCurve, h=h, radius=radius)
