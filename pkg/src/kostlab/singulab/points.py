"""Isolated singular points (codim m) by seeded damped Newton in charts."""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from ..errors import DegenerateSample, UnsupportedClass
from ..polycore import PolynomialMap, ambient_derivatives
from . import charts as ch
from .catalog import SingularityClass, codimension
from .circle import circle_critical_points, find_zeros_circle, interval_roots
from .results import PointCloudResult, empty_points

NEWTON_TOL = 1e-12
MAX_ITER = 60
RESIDUAL_TOL = 1e-10
COND_MAX = 1e8
MIN_EIG = 1e-9


def seed_spacing(d, scale=None):
    """``min(0.08, d^{-1/2}/8)`` on spheres; ``scale`` overrides the feature scale."""
    feature = 1.0 / math.sqrt(d) if scale is None else scale
    return min(0.08, feature / 8.0)


def damped_newton(system, u0, h, tol=NEWTON_TOL, max_iter=MAX_ITER, prefilter=2.0):
    """Vectorized damped Newton on ``system(u) -> (F (N,m), J (N,m,m))``.

    Seeds whose first full step exceeds ``prefilter * h`` are dropped: every
    root lies within ``h / sqrt(2)`` of some seed.  Seeds that have merged
    (closer than ``h / 8``, half the dedup radius) are collapsed after a few
    iterations.  Returns converged points, iteration counts, final
    Jacobians, residual norms and a convergence mask.
    """
    u = np.array(u0, dtype=np.float64)
    F, J = system(u)
    step = _solve(J, F)
    keep = np.isfinite(step).all(axis=1) & (np.linalg.norm(step, axis=1) < prefilter * h)
    u, F, J = u[keep], F[keep], J[keep]
    iters = np.zeros(len(u), dtype=np.int64)
    done = np.zeros(len(u), dtype=bool)
    maxstep = 2.0 * h
    for it in range(1, max_iter + 1):
        act = np.nonzero(~done)[0]
        if not len(act):
            break
        ua, Fa, Ja = u[act], F[act], J[act]
        st = _solve(Ja, Fa)
        bad = ~np.isfinite(st).all(axis=1)
        st[bad] = 0.0
        nrm = np.linalg.norm(st, axis=1)
        scale = np.minimum(1.0, maxstep / np.maximum(nrm, 1e-300))
        r0 = np.linalg.norm(Fa, axis=1)
        lam = scale.copy()
        for _ in range(4):
            cand = ua - lam[:, None] * st
            Fc, Jc = system(cand)
            worse = np.linalg.norm(Fc, axis=1) > r0 * (1 - 1e-4 * lam)
            worse &= lam * nrm > tol  # tiny steps are accepted as-is
            if not worse.any():
                break
            lam = np.where(worse, 0.5 * lam, lam)
        u[act], F[act], J[act] = cand, Fc, Jc
        iters[act] = it
        conv = (lam * nrm <= tol * (1.0 + np.linalg.norm(cand, axis=1))) | bad
        done[act[conv]] = True
        # stop chasing seeds that wandered off the chart or stall far from a root
        lost = np.abs(cand).max(axis=1) > 1.5
        if it >= 20:
            lost |= lam * nrm > 1e-6 * h
        done[act[lost & ~conv]] = True
        F[act[lost & ~conv]] = np.inf
        if it == 4:
            act = np.nonzero(~done)[0]
            if len(act) > 1:
                first = _dedup(u[act], h / 8)
                dup = np.ones(len(act), dtype=bool)
                dup[first] = False
                done[act[dup]] = True
                F[act[dup]] = np.inf
    return u, iters, J, np.linalg.norm(F, axis=1), done


def _solve(J, F):
    out = np.full(F.shape, np.nan)
    det = np.linalg.det(J)
    ok = np.isfinite(det) & (np.abs(det) > 0)
    if ok.any():
        out[ok] = np.linalg.solve(J[ok], F[ok][..., None])[..., 0]
    return out


def _dedup(x, radius):
    """Indices of a greedy subset with pairwise distance > ``radius``."""
    if len(x) == 0:
        return np.zeros(0, dtype=np.int64)
    tree = cKDTree(x)
    taken = np.zeros(len(x), dtype=bool)
    keep = []
    for i in range(len(x)):
        if taken[i]:
            continue
        keep.append(i)
        taken[tree.query_ball_point(x[i], radius)] = True
    return np.asarray(keep, dtype=np.int64)


# ---------------------------------------------------------------- S^2 residuals

def _face_system(field: ch.SpherePolyField, f, cls_name):
    d = field.d

    if cls_name == "ZeroSet":
        def system(u):
            q, g, _ = field.face_jet(f, u, 1)
            return q, g
    else:
        def system(u):
            # chart gradient of q * s^{-d/2}, with the positive factor dropped
            q, g, h = field.face_jet(f, u, 2)
            q, g, h = q[:, 0], g[:, 0], h[:, 0]
            s = 1.0 + np.einsum("ij,ij->i", u, u)
            F = g - d * (q / s)[:, None] * u
            J = (h - d * (g[:, None, :] * u[:, :, None]) / s[:, None, None]
                 - d * (q / s)[:, None, None] * np.eye(2)
                 + 2 * d * (q / s ** 2)[:, None, None] * u[:, :, None] * u[:, None, :])
            return F, J
    return system


def _intrinsic_residual(P, x, cls_name):
    v, g, _ = ambient_derivatives(P, x, 1, check_unit=False)
    if cls_name == "ZeroSet":
        return np.linalg.norm(v, axis=1)
    g = g[:, 0]
    tang = g - np.einsum("ni,ni->n", g, x)[:, None] * x
    return np.linalg.norm(tang, axis=1)


def _spherical_min_eig(P, x):
    from ..polycore import spherical_jet
    return np.array([np.linalg.eigvalsh(spherical_jet(P, xi, 2).hessian[0]).min() for xi in x])


def sphere_points(P: PolynomialMap, cls: SingularityClass, h=None) -> PointCloudResult:
    field = ch.SpherePolyField(P)
    name = "ZeroSet" if cls.name == "ZeroSet" else "CriticalPoints"
    h = seed_spacing(P.d) if h is None else h
    n = int(math.ceil(2 * ch.EXTENDED / h))
    t = np.linspace(-ch.EXTENDED, ch.EXTENDED, n + 1)
    A, B = np.meshgrid(t, t, indexing="ij")
    seeds = np.column_stack([A.ravel(), B.ravel()])
    pts, its, conds, faces = [], [], [], []
    for face in ch.FACES:
        u, it, J, _, done = damped_newton(_face_system(field, face.index, name), seeds, h)
        inside = done & (np.abs(u) <= ch.CORE + 1e-12).all(axis=1)
        if not inside.any():
            continue
        x = face.to_sphere(u[inside])
        own = ch.owner_face(x) == face.index
        pts.append(x[own])
        its.append(it[inside][own])
        conds.append(np.linalg.cond(J[inside][own]))
        faces.append(np.full(own.sum(), face.index))
    if not pts:
        return empty_points(3, h, h / 4)
    x, it, cond, fc = (np.concatenate(a) for a in (pts, its, conds, faces))
    res = _intrinsic_residual(P, x, name)
    ok = res < RESIDUAL_TOL
    x, it, cond, fc, res = x[ok], it[ok], cond[ok], fc[ok], res[ok]
    keep = _dedup(x, h / 4)
    x, it, cond, fc, res = x[keep], it[keep], cond[keep], fc[keep], res[keep]
    if len(cond) and cond.max() > COND_MAX:
        raise DegenerateSample("ill-conditioned Jacobian at an accepted point",
                               cond=float(cond.max()))
    if cls.name == "Minima" and len(x):
        mins = _spherical_min_eig(P, x) > MIN_EIG
        x, it, cond, fc, res = x[mins], it[mins], cond[mins], fc[mins], res[mins]
    return PointCloudResult(x, res, it, cond, fc, h / 4, h, {"rejected_residual": int((~ok).sum())})


# ---------------------------------------------------------------- disk fields

def disk_points(field, cls: SingularityClass, h=None, radius=1.0) -> PointCloudResult:
    """Zeros of a disk field with ``m = k`` inside the closed disk of ``radius``."""
    if cls.name != "ZeroSet":
        raise UnsupportedClass("disk extraction supports ZeroSet only")
    m = field.m
    h = seed_spacing(1, scale=getattr(field, "feature_scale", 1.0)) if h is None else h
    if m == 1:
        def func(t):
            return field.jet(np.asarray(t)[:, None], 0)[0][:, 0]
        n = int(math.ceil(2 * radius / (h / 8)))
        r = interval_roots(func, -radius, radius, n=n)
        _, g, _ = field.jet(r[:, None], 1)
        res = np.abs(func(r)) if len(r) else np.zeros(0)
        return PointCloudResult(r[:, None], res, np.zeros(len(r), dtype=np.int64),
                                np.ones(len(r)), np.zeros(len(r), dtype=np.int64), 0.0, h)
    L = radius * (1.0 + ch.OVERLAP)
    n = int(math.ceil(2 * L / h))
    t = np.linspace(-L, L, n + 1)
    A, B = np.meshgrid(t, t, indexing="ij")

    def system(u):
        v, g, _ = field.jet(u, 1)
        return v, g

    u, it, J, fres, done = damped_newton(system, np.column_stack([A.ravel(), B.ravel()]), h)
    ok = done & (np.linalg.norm(u, axis=1) <= radius) & (fres < RESIDUAL_TOL)
    u, it, J, fres = u[ok], it[ok], J[ok], fres[ok]
    keep = _dedup(u, h / 4)
    u, it, J, fres = u[keep], it[keep], J[keep], fres[keep]
    cond = np.linalg.cond(J) if len(J) else np.zeros(0)
    if len(cond) and cond.max() > COND_MAX:
        raise DegenerateSample("ill-conditioned Jacobian at an accepted point",
                               cond=float(cond.max()))
    return PointCloudResult(u, fres, it, cond, np.zeros(len(u), dtype=np.int64), h / 4, h)


# ---------------------------------------------------------------- dispatcher

def find_singular_points(psi, cls: SingularityClass, h=None) -> PointCloudResult:
    """Codimension-m singular points of a map on ``S^m`` (m = 1, 2) or a disk field."""
    if isinstance(psi, PolynomialMap):
        m = psi.m
        if codimension(cls, m) != m:
            raise UnsupportedClass(f"{cls.name} has codimension {codimension(cls, m)} != m = {m}")
        if cls.name == "ZeroSet" and psi.k != m:
            raise UnsupportedClass("ZeroSet points need k = m")
        if cls.name in ("CriticalPoints", "Minima") and psi.k != 1:
            raise UnsupportedClass("critical points need k = 1")
        if m == 1:
            if cls.name == "ZeroSet":
                return find_zeros_circle(psi)
            return circle_critical_points(psi, minima=cls.name == "Minima")
        if m == 2:
            if cls.name == "CuspPoints":
                from .cusps import find_cusps
                return find_cusps(psi, h=h)
            return sphere_points(psi, cls, h)
        raise UnsupportedClass("point extraction supports m in (1, 2)")
    return disk_points(psi, cls, h)
