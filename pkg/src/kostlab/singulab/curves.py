"""Zero curves of scalar fields on S^2 and on a square around D^2.

On the sphere every cube face carries the grid ``t = linspace(-1, 1, N+1)``
in both coordinates, so neighbouring faces share their boundary vertices
exactly.  Vertices get global ids on the cube-surface lattice; values at
shared vertices are unified before tracing, and the per-face fragments are
then glued through shared grid-edge keys.  No geometric matching is needed.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .. import kernels
from ..errors import DegenerateSample
from ..fields import DiskField
from ..polycore import PolynomialMap
from . import charts as ch
from .catalog import SingularityClass
from .results import CurveResult

FLAT_TOL = 1e-13
PROJECT_TOL = 1e-10
PROJECT_ITERS = 12
DISK_MARGIN = 1.0 + ch.OVERLAP
# Sphere grids run at half the nominal cell: at the nominal size about 2% of
# d = 36..64 samples change component count when the grid is doubled.
SPHERE_REFINE = 2


def cell_size(d=None, scale=None, refine=1):
    """``min(0.05, d^{-1/2}/8) / refine``; ``scale`` gives the feature scale directly."""
    feature = scale if scale is not None else 1.0 / math.sqrt(d)
    return min(0.05, feature / 8.0) / refine


def feature_degree(field):
    return getattr(field, "feature_degree", getattr(field, "degree", 1))


def as_scalar_field(psi, cls: SingularityClass | None = None):
    """Wrap a map or field as a scalar chart field (fold residual for FoldCurve)."""
    fold = cls is not None and cls.name == "FoldCurve"
    if isinstance(psi, PolynomialMap):
        if psi.m != 2:
            raise ValueError("curve extraction needs m = 2")
        spf = ch.SpherePolyField(psi)
        if fold:
            return ch.FoldField(spf)
        if psi.k != 1:
            raise ValueError("ZeroSet curves need k = 1")
        return spf.scalar(0)
    if isinstance(psi, ch.SpherePolyField):
        return ch.FoldField(psi) if fold else psi.scalar(0)
    if isinstance(psi, DiskField) or (hasattr(psi, "jet") and not hasattr(psi, "grid")):
        return ch.DiskFold(psi) if fold else ch.DiskScalar(psi)
    return psi


# ---------------------------------------------------------------- graph helpers

def _edge_vertices(e, n0, n1):
    """Local (i, j) endpoints of local edge ids as two flat vertex indices."""
    na = (n0 - 1) * n1
    a = e < na
    i = np.where(a, e // n1, (e - na) // (n1 - 1))
    j = np.where(a, e % n1, (e - na) % (n1 - 1))
    v0 = i * n1 + j
    v1 = np.where(a, (i + 1) * n1 + j, i * n1 + j + 1)
    return v0, v1


def _chain_links(edges, offsets, closed):
    """Consecutive edge pairs of every chain (closing pair for loops)."""
    a, b = [], []
    for c in range(len(closed)):
        ch_e = edges[offsets[c]:offsets[c + 1]]
        if len(ch_e) < 2:
            continue
        a.append(ch_e[:-1])
        b.append(ch_e[1:])
        if closed[c]:
            a.append(ch_e[-1:])
            b.append(ch_e[:1])
    if not a:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(a), np.concatenate(b)


def order_components(n, links):
    """Split a max-degree-2 graph into ordered vertex walks.

    Returns ``(walks, closed)``; closed walks do not repeat their first vertex.
    """
    links = np.asarray(links, dtype=np.int64).reshape(-1, 2)
    nbr = np.full((n, 2), -1, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    for a, b in links:
        if deg[a] >= 2 or deg[b] >= 2:
            raise DegenerateSample("stitch graph has a vertex of degree > 2")
        nbr[a, deg[a]] = b
        nbr[b, deg[b]] = a
        deg[a] += 1
        deg[b] += 1
    seen = np.zeros(n, dtype=bool)
    walks, closed = [], []

    def walk(start):
        out = [start]
        seen[start] = True
        prev, cur = -1, start
        while True:
            nxt = nbr[cur, 0] if nbr[cur, 0] != prev else nbr[cur, 1]
            if nbr[cur, 0] == nbr[cur, 1] and prev != -1:
                nxt = -1
            if nxt < 0 or seen[nxt]:
                return out, nxt == start
            out.append(nxt)
            seen[nxt] = True
            prev, cur = cur, nxt

    for v in np.nonzero(deg == 1)[0]:
        if not seen[v]:
            w, _ = walk(int(v))
            walks.append(np.asarray(w))
            closed.append(False)
    for v in np.nonzero(deg == 2)[0]:
        if not seen[v]:
            w, is_closed = walk(int(v))
            walks.append(np.asarray(w))
            closed.append(bool(is_closed))
    return walks, np.asarray(closed, dtype=bool)


# ---------------------------------------------------------------- projection

def project_sphere(field, x, h, tol=PROJECT_TOL, iters=PROJECT_ITERS):
    """Newton steps along the tangential gradient, renormalizing to the sphere."""
    x = np.array(x, dtype=np.float64)
    x0 = x.copy()
    act = np.arange(len(x))
    for _ in range(iters):
        if not len(act):
            break
        v, g = field.value_grad(x[act])
        g = g - np.einsum("ni,ni->n", g, x[act])[:, None] * x[act]
        gg = np.einsum("ni,ni->n", g, g)
        ok = gg > 0
        step = np.zeros_like(g)
        step[ok] = (v[ok] / gg[ok])[:, None] * g[ok]
        new = x[act] - step
        new /= np.linalg.norm(new, axis=1, keepdims=True)
        moved = np.linalg.norm(new - x[act], axis=1)
        x[act] = new
        act = act[moved > tol]
    far = np.linalg.norm(x - x0, axis=1) > 2 * h
    x[far] = x0[far]
    return x, int(far.sum())


def project_plane(field, u, h, tol=PROJECT_TOL, iters=PROJECT_ITERS):
    u = np.array(u, dtype=np.float64)
    u0 = u.copy()
    act = np.arange(len(u))
    for _ in range(iters):
        if not len(act):
            break
        v, g = field.value_grad(u[act])
        gg = np.einsum("ni,ni->n", g, g)
        ok = gg > 0
        step = np.zeros_like(g)
        step[ok] = (v[ok] / gg[ok])[:, None] * g[ok]
        u[act] -= step
        act = act[np.linalg.norm(step, axis=1) > tol]
    far = np.linalg.norm(u - u0, axis=1) > 2 * h
    u[far] = u0[far]
    return u, int(far.sum())


# ---------------------------------------------------------------- sphere

def _face_lattice(face, N):
    """Global cube-lattice id of every vertex of a face grid."""
    p = np.arange(N + 1)
    P_, Q_ = np.meshgrid(p, p, indexing="ij")
    idx = np.empty((3,) + P_.shape, dtype=np.int64)
    idx[face.axis] = N if face.sign > 0 else 0
    idx[face.j] = P_
    idx[face.l] = Q_
    return (idx[0] * (N + 1) + idx[1]) * (N + 1) + idx[2]


def _sphere_grids(field, N):
    t = np.linspace(-1.0, 1.0, N + 1)
    mid = 0.5 * (t[:-1] + t[1:])
    gids, vals, cents = [], [], []
    for face in ch.FACES:
        gids.append(_face_lattice(face, N))
        vals.append(field.grid(face.index, t, t))
        cents.append(field.grid(face.index, mid, mid))
    uniq, inv = np.unique(np.concatenate([g.ravel() for g in gids]), return_inverse=True)
    unified = np.empty(len(uniq))
    unified[inv] = np.concatenate([v.ravel() for v in vals])
    size = (N + 1) ** 2
    local = [inv[f * size:(f + 1) * size].reshape(N + 1, N + 1) for f in range(6)]
    vals = [unified[lv] for lv in local]
    # cube-surface coordinates of each unified vertex
    I0 = uniq // (N + 1) ** 2
    I1 = (uniq // (N + 1)) % (N + 1)
    I2 = uniq % (N + 1)
    pos = np.column_stack([t[I0], t[I1], t[I2]])
    return t, unified, pos, local, vals, cents


def _check_flat(vals):
    for V in vals:
        small = np.abs(V) < FLAT_TOL
        flat = small[:-1, :-1] & small[1:, :-1] & small[1:, 1:] & small[:-1, 1:]
        if flat.any():
            raise DegenerateSample("grid cell with all corners at zero")


def _extract_sphere(field, h, project=True):
    N = int(math.ceil(2.0 / h))
    t, unified, pos, local, vals, cents = _sphere_grids(field, N)
    _check_flat(vals)
    M = len(unified)
    keys, la, lb = [], [], []
    for f in range(6):
        edges, offsets, closed = kernels.trace_contours(vals[f], cents[f])
        if not len(edges):
            continue
        v0, v1 = _edge_vertices(edges, N + 1, N + 1)
        g0, g1 = local[f].ravel()[v0], local[f].ravel()[v1]
        k = np.minimum(g0, g1) * M + np.maximum(g0, g1)
        a, b = _chain_links(np.arange(len(edges)), offsets, closed)
        keys.append(k)
        la.append(k[a])
        lb.append(k[b])
    if not keys:
        return CurveResult([], np.zeros(0, dtype=bool), [], h, "sphere")
    allk, node_of = np.unique(np.concatenate(keys), return_inverse=True)
    links = np.column_stack([np.searchsorted(allk, np.concatenate(la)),
                             np.searchsorted(allk, np.concatenate(lb))])
    lo, hi = allk // M, allk % M
    w = unified[lo] / (unified[lo] - unified[hi])
    x = pos[lo] + w[:, None] * (pos[hi] - pos[lo])
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    far = 0
    if project:
        x, far = project_sphere(field, x, h)
    walks, closed = order_components(len(allk), links)
    polys, charts = [], []
    for wk, c in zip(walks, closed):
        p = x[wk]
        if c:
            p = np.vstack([p, p[:1]])
        polys.append(p)
        charts.append(ch.owner_face(p))
    return CurveResult(polys, closed, charts, h, "sphere", n_nodes=len(allk),
                       n_links=len(links), flags={"unprojected": far})


# ---------------------------------------------------------------- disk

def _extract_disk(field, h, radius=1.0, project=True):
    L = radius * DISK_MARGIN
    N = int(math.ceil(2 * L / h))
    t = np.linspace(-L, L, N + 1)
    mid = 0.5 * (t[:-1] + t[1:])
    V = field.grid(t, t)
    C = field.grid(mid, mid)
    _check_flat([V])
    edges, offsets, closed = kernels.trace_contours(V, C)
    if not len(edges):
        return CurveResult([], np.zeros(0, dtype=bool), [], h, "disk", reference_radius=radius)
    v0, v1 = _edge_vertices(edges, N + 1, N + 1)
    keys, node_of = np.unique(edges, return_inverse=True)
    a, b = _chain_links(np.arange(len(edges)), offsets, closed)
    links = np.column_stack([node_of[a], node_of[b]])
    first = np.unique(node_of, return_index=True)[1]
    i0, j0 = np.divmod(v0[first], N + 1)
    i1, j1 = np.divmod(v1[first], N + 1)
    f0, f1 = V[i0, j0], V[i1, j1]
    w = f0 / (f0 - f1)
    u = np.column_stack([t[i0] + w * (t[i1] - t[i0]), t[j0] + w * (t[j1] - t[j0])])
    far = 0
    if project:
        u, far = project_plane(field, u, h)
    walks, cl = order_components(len(keys), links)
    polys, charts = [], []
    for wk, c in zip(walks, cl):
        p = u[wk]
        if c:
            p = np.vstack([p, p[:1]])
        polys.append(p)
        charts.append(np.zeros(len(p), dtype=np.int64))
    return CurveResult(polys, cl, charts, h, "disk", n_nodes=len(keys), n_links=len(links),
                       reference_radius=radius, flags={"unprojected": far})


def extract_zero_curve(psi, cls: SingularityClass | None = None, h=None, project=True,
                       radius=1.0) -> CurveResult:
    """Zero set of a scalar field (or fold locus of a planar map) as polylines."""
    field = as_scalar_field(psi, cls)
    if field.kind == "sphere":
        h = cell_size(feature_degree(field), refine=SPHERE_REFINE) if h is None else h
        return _extract_sphere(field, h, project)
    if field.kind == "disk":
        h = cell_size(scale=1.0) if h is None else h
        return _extract_disk(field, h, radius, project)
    raise ValueError(f"unsupported field kind {field.kind!r}")


# ---------------------------------------------------------------- oracle

def flood_fill_b0(psi, h=None, refine=4, cls=None) -> int:
    """Independent component count on S^2 from sign regions of a finer grid.

    For a transversal zero set on S^2, ``b0 = #sign regions - 1``.  Saddle
    cells join the diagonal pair that shares the sign of the cell centre.
    """
    field = as_scalar_field(psi, cls)
    h = cell_size(feature_degree(field), refine=SPHERE_REFINE) if h is None else h
    N = refine * int(math.ceil(2.0 / h))
    t, unified, _, local, _, cents = _sphere_grids(field, N)
    pos = unified > 0
    rows, cols = [], []
    for f in range(6):
        g = local[f]
        s = pos[g]
        for a, b in ((g[:-1, :], g[1:, :]), (g[:, :-1], g[:, 1:])):
            same = pos[a] == pos[b]
            rows.append(a[same])
            cols.append(b[same])
        c0, c1, c2, c3 = g[:-1, :-1], g[1:, :-1], g[1:, 1:], g[:-1, 1:]
        s0, s1, s2, s3 = s[:-1, :-1], s[1:, :-1], s[1:, 1:], s[:-1, 1:]
        saddle = (s0 == s2) & (s1 == s3) & (s0 != s1)
        cpos = cents[f] > 0
        join02 = saddle & (cpos == s0)
        join13 = saddle & (cpos == s1)
        rows += [c0[join02], c1[join13]]
        cols += [c2[join02], c3[join13]]
    r, c = np.concatenate(rows), np.concatenate(cols)
    n = len(unified)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(n, n))
    ncomp, _ = connected_components(graph, directed=False)
    return int(ncomp) - 1
