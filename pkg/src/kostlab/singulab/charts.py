"""Chart atlases and chart-level evaluation of fields on S^2, S^1 and D^2.

S^2 is covered by the six gnomonic cube faces.  Face ``(i, sigma)`` maps
``(a, b)`` to ``y = sigma e_i + a e_j + b e_l`` (``j = i+1``, ``l = i+2`` mod 3)
and then to ``y / |y|``.  A homogeneous ``P`` restricted to a face plane is
the bivariate polynomial ``q(a, b) = P(y)``, and ``psi(x) = q * s^{-d/2}``
with ``s = 1 + a^2 + b^2``.  Evaluating ``q`` on tensor grids is two matmuls.

Scalar sphere fields share a small interface used by the curve extractor:
``grid(face, ta, tb)`` gives sphere-normalized values on a tensor grid and
``value_grad(x)`` gives the value and ambient gradient at unit vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..polycore import PolynomialMap, enumerate_multi_indices

CORE = 1.0
OVERLAP = 0.15
EXTENDED = CORE * (1.0 + OVERLAP)


@dataclass(frozen=True)
class Face:
    index: int
    axis: int
    sign: float

    @property
    def j(self):
        return (self.axis + 1) % 3

    @property
    def l(self):
        return (self.axis + 2) % 3

    def to_sphere(self, ab):
        """Face coordinates ``(N, 2)`` to unit vectors ``(N, 3)``."""
        ab = np.atleast_2d(ab)
        y = np.empty((len(ab), 3))
        y[:, self.axis] = self.sign
        y[:, self.j] = ab[:, 0]
        y[:, self.l] = ab[:, 1]
        return y / np.linalg.norm(y, axis=1, keepdims=True)

    def from_sphere(self, x):
        """Inverse chart; only meaningful where ``sign * x_axis > 0``."""
        x = np.atleast_2d(x)
        t = 1.0 / (self.sign * x[:, self.axis])
        return np.column_stack([x[:, self.j] * t, x[:, self.l] * t])


FACES = tuple(Face(2 * i + n, i, s) for i in range(3) for n, s in enumerate((1.0, -1.0)))


def owner_face(x):
    """Index of the face whose core contains each unit vector."""
    x = np.atleast_2d(x)
    axis = np.argmax(np.abs(x), axis=1)
    neg = x[np.arange(len(x)), axis] < 0
    return 2 * axis + neg.astype(np.int64)


def to_face_coords(x):
    """``(face, ab)`` in the owner chart for each unit vector."""
    x = np.atleast_2d(x)
    f = owner_face(x)
    ab = np.empty((len(x), 2))
    for face in FACES:
        sel = f == face.index
        if sel.any():
            ab[sel] = face.from_sphere(x[sel])
    return f, ab


def _powers(t, n):
    """``t^p`` for ``p < n`` as an ``(len(t), n)`` array (cumulative products)."""
    t = np.asarray(t, dtype=np.float64).ravel()
    out = np.empty((max(n, 1), len(t)))
    out[0] = 1.0
    out[1:] = t
    np.cumprod(out, axis=0, out=out)
    return out[:n].T


def _tensor(Va, C, Vb):
    return Va @ C @ Vb.T


def _scatter(Va, C, Vb):
    return np.einsum("np,np->n", Va @ C, Vb)


def geodesic(x, y):
    """Great-circle distance between rows of unit vectors."""
    c = np.clip(np.einsum("ij,ij->i", np.atleast_2d(x), np.atleast_2d(y)), -1.0, 1.0)
    return np.arccos(c)


# ---------------------------------------------------------------- S^2 polynomial fields

class SpherePolyField:
    """A homogeneous map ``P`` with ``m = 2`` evaluated through the cube atlas."""

    kind = "sphere"

    def __init__(self, P: PolynomialMap):
        if P.m != 2:
            raise ValueError("SpherePolyField needs m = 2")
        self.P, self.d, self.k = P, P.d, P.k
        self.degree = P.d
        exps = enumerate_multi_indices(2, P.d)
        d = P.d
        self._C = []
        for face in FACES:
            C = np.zeros((P.k, d + 1, d + 1))
            sgn = face.sign ** exps[:, face.axis]
            C[:, exps[:, face.j], exps[:, face.l]] = P.coefficients * sgn
            self._C.append(C)
        self._derived = {}

    def coeff(self, f, da=0, db=0):
        """Coefficient tensor of ``d^da/da d^db/db q`` on face ``f``."""
        key = (f, da, db)
        if key not in self._derived:
            C = self._C[f]
            p = np.arange(self.d + 1, dtype=np.float64)
            for _ in range(da):
                C = C[:, 1:, :] * p[1:C.shape[1], None]
            for _ in range(db):
                C = C[:, :, 1:] * p[None, 1:C.shape[2]]
            self._derived[key] = C
        return self._derived[key]

    # -- face level
    def face_grid(self, f, ta, tb, da=0, db=0):
        """``(k, na, nb)`` raw face-polynomial derivative values on a tensor grid."""
        C = self.coeff(f, da, db)
        if C.shape[1] == 0 or C.shape[2] == 0:
            return np.zeros((self.k, len(ta), len(tb)))
        Va, Vb = _powers(ta, C.shape[1]), _powers(tb, C.shape[2])
        return np.stack([_tensor(Va, C[c], Vb) for c in range(self.k)])

    def face_eval(self, f, ab, da=0, db=0):
        """``(N, k)`` raw face-polynomial derivative values at scattered points."""
        ab = np.atleast_2d(ab)
        C = self.coeff(f, da, db)
        if C.shape[1] == 0 or C.shape[2] == 0:
            return np.zeros((len(ab), self.k))
        Va, Vb = _powers(ab[:, 0], C.shape[1]), _powers(ab[:, 1], C.shape[2])
        return np.stack([_scatter(Va, C[c], Vb) for c in range(self.k)], axis=1)

    def _jet_stack(self, f, r):
        """All derivative tensors up to order ``r``, zero-padded to ``(d+1, d+1)``."""
        key = (f, "stack", r)
        if key not in self._derived:
            n = self.d + 1
            orders = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)][:(1, 3, 6)[r]]
            S = np.zeros((len(orders), self.k, n, n))
            for o, (da, db) in enumerate(orders):
                C = self.coeff(f, da, db)
                S[o, :, :C.shape[1], :C.shape[2]] = C
            # (n, orders * k * n) so one matmul covers every derivative
            self._derived[key] = np.ascontiguousarray(S.transpose(2, 0, 1, 3).reshape(n, -1))
        return self._derived[key]

    def face_jet(self, f, ab, r=2):
        """Value ``(N,k)``, gradient ``(N,k,2)``, Hessian ``(N,k,2,2)`` of ``q``."""
        ab = np.atleast_2d(ab)
        n, k = self.d + 1, self.k
        S = self._jet_stack(f, r)
        Va, Vb = _powers(ab[:, 0], n), _powers(ab[:, 1], n)
        T = (Va @ S).reshape(len(ab), -1, n)
        vals = np.einsum("nmq,nq->nm", T, Vb).reshape(len(ab), -1, k)
        q = vals[:, 0]
        g = h = None
        if r >= 1:
            g = np.stack([vals[:, 1], vals[:, 2]], axis=-1)
        if r >= 2:
            qaa, qab, qbb = vals[:, 3], vals[:, 4], vals[:, 5]
            h = np.stack([np.stack([qaa, qab], -1), np.stack([qab, qbb], -1)], -2)
        return q, g, h

    def grid(self, f, ta, tb, component=0):
        """Sphere-normalized values ``psi`` on a face tensor grid."""
        s = 1.0 + ta[:, None] ** 2 + tb[None, :] ** 2
        return self.face_grid(f, ta, tb)[component] * s ** (-0.5 * self.d)

    # -- ambient level
    def ambient_jet(self, x, r=2):
        """Value, ambient gradient and Hessian at unit vectors, via owner faces.

        Euler's identity recovers the derivatives along the face normal, so
        the result equals ``polycore.ambient_derivatives`` without monomial tables.
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        n, k, d = len(x), self.k, self.d
        faces, ab = to_face_coords(x)
        val = np.empty((n, k))
        grad = np.empty((n, k, 3)) if r >= 1 else None
        hess = np.empty((n, k, 3, 3)) if r >= 2 else None
        for face in FACES:
            sel = np.nonzero(faces == face.index)[0]
            if not len(sel):
                continue
            a, b = ab[sel, 0][:, None], ab[sel, 1][:, None]
            sg = face.sign
            rad = np.sqrt(1.0 + a * a + b * b)  # |y|
            q, g, h = self.face_jet(face.index, ab[sel], r)
            val[sel] = q / rad ** d
            if r == 0:
                continue
            qa, qb = g[..., 0], g[..., 1]
            gi = sg * (d * q - a * qa - b * qb)
            perm = [face.axis, face.j, face.l]
            G = np.stack([gi, qa, qb], axis=-1)
            gg = np.empty((len(sel), k, 3))
            gg[..., perm] = G
            grad[sel] = gg / rad[..., None] ** (d - 1)
            if r == 1:
                continue
            qaa, qab, qbb = h[..., 0, 0], h[..., 0, 1], h[..., 1, 1]
            hij = sg * ((d - 1) * qa - a * qaa - b * qab)
            hil = sg * ((d - 1) * qb - a * qab - b * qbb)
            hii = sg * ((d - 1) * gi - a * hij - b * hil)
            H = np.empty((len(sel), k, 3, 3))
            rows = [[hii, hij, hil], [hij, qaa, qab], [hil, qab, qbb]]
            for p in range(3):
                for s_ in range(3):
                    H[..., perm[p], perm[s_]] = rows[p][s_]
            hess[sel] = H / rad[..., None, None] ** (d - 2)
        return val, grad, hess

    def value_grad(self, x, component=0):
        v, g, _ = self.ambient_jet(x, 1)
        return v[:, component], g[:, component]

    def scalar(self, component=0):
        return ComponentField(self, component)


class ComponentField:
    """One component of a multi-output sphere field as a scalar field."""

    kind = "sphere"

    def __init__(self, parent: SpherePolyField, component: int):
        self.parent, self.component = parent, component
        self.degree = parent.degree

    def grid(self, f, ta, tb):
        return self.parent.grid(f, ta, tb, self.component)

    def value_grad(self, x):
        return self.parent.value_grad(x, self.component)


class FoldField:
    """Fold residual ``g(x) = det[x, grad P_1, grad P_2]`` of a planar map on S^2.

    ``g`` is homogeneous of degree ``2d - 1``, so its sign is chart-independent.
    """

    kind = "sphere"

    def __init__(self, field: SpherePolyField):
        if field.k != 2:
            raise ValueError("fold residual needs k = 2")
        self.field = field
        self.degree = 2 * field.d - 1
        self.feature_degree = field.d

    def grid(self, f, ta, tb):
        fld, d = self.field, self.field.d
        sg = FACES[f].sign
        q = fld.face_grid(f, ta, tb)
        qa = fld.face_grid(f, ta, tb, 1, 0)
        qb = fld.face_grid(f, ta, tb, 0, 1)
        A, B = ta[:, None], tb[None, :]
        gi = sg * (d * q - A * qa - B * qb)  # (2, na, nb)
        # det[y, G1, G2] with y = (sigma, a, b) in (i, j, l) order
        g = (sg * (qa[0] * qb[1] - qb[0] * qa[1])
             - A * (gi[0] * qb[1] - qb[0] * gi[1])
             + B * (gi[0] * qa[1] - qa[0] * gi[1]))
        s = 1.0 + A ** 2 + B ** 2
        return g * s ** (-0.5 * self.degree)

    def value_grad(self, x):
        x = np.atleast_2d(x)
        _, G, H = self.field.ambient_jet(x, 2)
        a, b = G[:, 0], G[:, 1]
        axb = np.cross(a, b)
        val = np.einsum("ij,ij->i", x, axb)
        grad = (axb + np.einsum("nij,nj->ni", H[:, 0], np.cross(b, x))
                + np.einsum("nij,nj->ni", H[:, 1], np.cross(x, a)))
        return val, grad


class SumField:
    """Pointwise sum of scalar fields living on the same manifold."""

    def __init__(self, *parts):
        self.parts = parts
        self.kind = parts[0].kind
        self.degree = max(getattr(p, "degree", 1) for p in parts)
        self.feature_degree = max(getattr(p, "feature_degree", getattr(p, "degree", 1))
                                  for p in parts)

    def grid(self, *args):
        return sum(p.grid(*args) for p in self.parts)

    def value_grad(self, x):
        vals = [p.value_grad(x) for p in self.parts]
        return sum(v for v, _ in vals), sum(g for _, g in vals)

    def values(self, theta):
        return sum(p.values(theta) for p in self.parts)


class ScaledField:
    def __init__(self, base, scale):
        self.base, self.scale = base, float(scale)
        self.kind, self.degree = base.kind, getattr(base, "degree", 1)
        self.feature_degree = getattr(base, "feature_degree", self.degree)

    def grid(self, *args):
        return self.scale * self.base.grid(*args)

    def value_grad(self, x):
        v, g = self.base.value_grad(x)
        return self.scale * v, self.scale * g

    def values(self, theta):
        return self.scale * self.base.values(theta)


class TrigBumpSphere:
    """``eps * sin(omega * a.x + phase)`` on S^2."""

    kind = "sphere"
    degree = 1

    def __init__(self, eps, omega, direction, phase):
        self.eps, self.omega, self.phase = float(eps), float(omega), float(phase)
        self.feature_degree = max(1, int(np.ceil(self.omega ** 2)))
        a = np.asarray(direction, dtype=np.float64)
        self.direction = a / np.linalg.norm(a)

    def grid(self, f, ta, tb):
        face = FACES[f]
        A, B = np.meshgrid(ta, tb, indexing="ij")
        x = face.to_sphere(np.column_stack([A.ravel(), B.ravel()]))
        return self._val(x).reshape(A.shape)

    def _val(self, x):
        return self.eps * np.sin(self.omega * (x @ self.direction) + self.phase)

    def value_grad(self, x):
        x = np.atleast_2d(x)
        arg = self.omega * (x @ self.direction) + self.phase
        return (self.eps * np.sin(arg),
                (self.eps * self.omega * np.cos(arg))[:, None] * self.direction)


def face_grid_points(f, ta, tb):
    A, B = np.meshgrid(ta, tb, indexing="ij")
    return FACES[f].to_sphere(np.column_stack([A.ravel(), B.ravel()])).reshape(len(ta), len(tb), 3)


# ---------------------------------------------------------------- S^1 fields

_SCAN_CACHE = {}


def circle_basis(theta, d):
    """``cos^{d-b} sin^b`` for ``b = 0..d`` at each angle (the enumeration order)."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    pc = np.empty((d + 1, len(theta)))
    ps = np.empty((d + 1, len(theta)))
    pc[0] = ps[0] = 1.0
    pc[1:] = np.cos(theta)
    ps[1:] = np.sin(theta)
    np.cumprod(pc, axis=0, out=pc)
    np.cumprod(ps, axis=0, out=ps)
    return (pc[::-1] * ps).T


SCAN_PHASE = 0.5 * (np.sqrt(5.0) - 1.0)


def scan_angles(n):
    """Uniform scan angles shifted by an irrational fraction of a step.

    The shift keeps exactly placed zeros of symmetric fields (``x_1`` at
    ``theta = 0``) off the scan points, where they would look like tangencies.
    """
    return 2 * np.pi * (np.arange(n) + SCAN_PHASE) / n


def scan_basis(d, n):
    """Cached basis matrix at ``n`` uniform angles, shared by all fields of degree ``d``."""
    key = (d, n)
    if key not in _SCAN_CACHE:
        if len(_SCAN_CACHE) > 32:
            _SCAN_CACHE.clear()
        _SCAN_CACHE[key] = circle_basis(scan_angles(n), d)
    return _SCAN_CACHE[key]


class CirclePolyField:
    """``theta -> P(cos theta, sin theta)`` for a map with ``m = 1``."""

    kind = "circle"

    def __init__(self, P: PolynomialMap, component=0):
        if P.m != 1:
            raise ValueError("CirclePolyField needs m = 1")
        self.P, self.d = P, P.d
        self.degree = P.d
        self.c = np.array(P.coefficients[component])

    def scan_matrix(self, n):
        return scan_basis(self.d, n)

    def values(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        return (circle_basis(theta, self.d) @ self.c).reshape(theta.shape)

    def derivative(self) -> "CircleDerivative":
        return CircleDerivative(self)

    def jet(self, theta):
        """``psi, psi', psi''`` along the unit-speed angle parameter."""
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        x = np.column_stack([np.cos(theta), np.sin(theta)])
        t = np.column_stack([-np.sin(theta), np.cos(theta)])
        from ..polycore import ambient_derivatives
        v, g, h = ambient_derivatives(self.P.component(0) if self.P.k == 1 else self.P, x, 2,
                                      check_unit=False)
        v, g, h = v[:, 0], g[:, 0], h[:, 0]
        d1 = np.einsum("ni,ni->n", g, t)
        d2 = np.einsum("ni,nij,nj->n", t, h, t) - self.d * v
        return v, d1, d2


class CircleDerivative(CirclePolyField):
    """``psi'`` in the same ``cos^{d-b} sin^b`` basis."""

    def __init__(self, base: CirclePolyField):
        self.base, self.P = base, base.P
        self.d = self.degree = base.d
        d, c = base.d, base.c
        b = np.arange(d + 1)
        out = np.zeros(d + 1)
        # d/dtheta cos^{d-b} sin^b = -(d-b) cos^{d-b-1} sin^{b+1} + b cos^{d-b+1} sin^{b-1}
        out[1:] -= ((d - b) * c)[:-1]
        out[:-1] += (b * c)[1:]
        self.c = out

    def derivative(self):
        raise NotImplementedError("only the first derivative is provided")


class TrigBumpCircle:
    """``eps * sin(omega * theta + phase)``; ``degree`` sets the scan resolution."""

    kind = "circle"

    def __init__(self, eps, omega, phase):
        self.eps, self.omega, self.phase = float(eps), float(omega), float(phase)
        self.degree = max(1, int(np.ceil(self.omega ** 2)))

    def values(self, theta):
        return self.eps * np.sin(self.omega * np.asarray(theta) + self.phase)


# ---------------------------------------------------------------- D^2 fields

class DiskScalar:
    """Scalar view of a disk field (identity chart on a square around D^2)."""

    kind = "disk"

    def __init__(self, field, component=0):
        self.field, self.component = field, component
        self.degree = 1

    def grid(self, ta, tb):
        if hasattr(self.field, "grid_values"):
            return self.field.grid_values(ta, tb)[self.component]
        A, B = np.meshgrid(ta, tb, indexing="ij")
        v = self.field.jet(np.column_stack([A.ravel(), B.ravel()]), 0)[0][:, self.component]
        return v.reshape(A.shape)

    def value_grad(self, u):
        v, g, _ = self.field.jet(np.atleast_2d(u), 1)
        return v[:, self.component], g[:, self.component]


class DiskFold:
    """``det`` of the Jacobian of a planar disk map (fold residual)."""

    kind = "disk"
    degree = 1

    def __init__(self, field):
        if field.k != 2 or field.m != 2:
            raise ValueError("fold residual needs m = k = 2")
        self.field = field

    def grid(self, ta, tb):
        A, B = np.meshgrid(ta, tb, indexing="ij")
        v, _ = self.value_grad(np.column_stack([A.ravel(), B.ravel()]), order=1)
        return v.reshape(A.shape)

    def value_grad(self, u, order=2):
        _, J, H = self.field.jet(np.atleast_2d(u), order)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        if order < 2:
            return det, None
        grad = (H[:, 0, 0, :] * J[:, 1, 1, None] + J[:, 0, 0, None] * H[:, 1, 1, :]
                - H[:, 0, 1, :] * J[:, 1, 0, None] - J[:, 0, 1, None] * H[:, 1, 0, :])
        return det, grad


class PolyDiskField:
    """An explicit affine polynomial map on the disk (used for normal forms)."""

    def __init__(self, exps, coeffs):
        from ..fields import AffinePoly
        self._poly = AffinePoly(exps, coeffs)
        self.m, self.k = self._poly.m, self._poly.k

    def jet(self, u, r=0):
        return self._poly.jet(np.atleast_2d(u), r)

    @classmethod
    def from_terms(cls, terms_per_component):
        """``[{(p, q): c, ...}, ...]`` -> field with one component per dict."""
        keys = sorted({e for t in terms_per_component for e in t})
        C = np.array([[t.get(e, 0.0) for e in keys] for t in terms_per_component])
        return cls(np.array(keys, dtype=np.int64), C)
