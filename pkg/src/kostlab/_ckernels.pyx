# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, INFINITY

cnp.import_array()

# case -> up to two (edge, edge) pairs; -1 marks unused.  Saddles use rows
# 16..19: (5, centre>0), (5, centre<=0), (10, centre>0), (10, centre<=0).
cdef int _TABLE[20][4]
_rows = {
    0: (-1, -1, -1, -1), 15: (-1, -1, -1, -1),
    1: (3, 0, -1, -1), 2: (0, 1, -1, -1), 3: (3, 1, -1, -1), 4: (1, 2, -1, -1),
    5: (-1, -1, -1, -1), 6: (0, 2, -1, -1), 7: (2, 3, -1, -1), 8: (2, 3, -1, -1),
    9: (0, 2, -1, -1), 10: (-1, -1, -1, -1), 11: (1, 2, -1, -1), 12: (1, 3, -1, -1),
    13: (0, 1, -1, -1), 14: (3, 0, -1, -1),
    16: (0, 1, 2, 3), 17: (3, 0, 1, 2), 18: (3, 0, 1, 2), 19: (0, 1, 2, 3),
}
for _k, _v in _rows.items():
    for _c in range(4):
        _TABLE[_k][_c] = _v[_c]


def trace_contours(f, center):
    cdef double[:, ::1] F = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[:, ::1] C = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n0 = F.shape[0], n1 = F.shape[1]
    cdef Py_ssize_t na = (n0 - 1) * n1
    cdef Py_ssize_t nedges = na + n0 * (n1 - 1)
    cdef Py_ssize_t i, j, s, e, nseg = 0, k
    cdef int cs, row, p
    cdef long ce[4]
    seg_np = np.empty((2 * (n0 - 1) * (n1 - 1) + 1, 2), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] seg = seg_np
    for i in range(n0 - 1):
        for j in range(n1 - 1):
            cs = ((F[i, j] > 0) | ((F[i + 1, j] > 0) << 1)
                  | ((F[i + 1, j + 1] > 0) << 2) | ((F[i, j + 1] > 0) << 3))
            if cs == 0 or cs == 15:
                continue
            row = cs
            if cs == 5:
                row = 16 if C[i, j] > 0 else 17
            elif cs == 10:
                row = 18 if C[i, j] > 0 else 19
            ce[0] = i * n1 + j
            ce[1] = na + (i + 1) * (n1 - 1) + j
            ce[2] = i * n1 + j + 1
            ce[3] = na + i * (n1 - 1) + j
            for p in range(0, 4, 2):
                if _TABLE[row][p] < 0:
                    break
                seg[nseg, 0] = ce[_TABLE[row][p]]
                seg[nseg, 1] = ce[_TABLE[row][p + 1]]
                nseg += 1
    slot_np = np.full((nedges, 2), -1, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] slot = slot_np
    for s in range(nseg):
        for k in range(2):
            e = seg[s, k]
            if slot[e, 0] < 0:
                slot[e, 0] = s
            else:
                slot[e, 1] = s
    used_np = np.zeros(nseg + 1, dtype=np.uint8)
    cdef cnp.uint8_t[::1] used = used_np
    out_np = np.empty(2 * nseg + 2, dtype=np.int64)
    cdef cnp.int64_t[::1] out = out_np
    offsets = [0]
    closed = []
    cdef Py_ssize_t nout = 0, start
    cdef Py_ssize_t cur_e, cur_s, a, b
    # open chains
    for e in range(nedges):
        if slot[e, 0] >= 0 and slot[e, 1] < 0 and not used[slot[e, 0]]:
            cur_e = e
            cur_s = slot[e, 0]
            out[nout] = cur_e
            nout += 1
            while cur_s >= 0 and not used[cur_s]:
                used[cur_s] = 1
                cur_e = seg[cur_s, 1] if seg[cur_s, 0] == cur_e else seg[cur_s, 0]
                out[nout] = cur_e
                nout += 1
                a = slot[cur_e, 0]
                b = slot[cur_e, 1]
                cur_s = b if a == cur_s else a
            offsets.append(nout)
            closed.append(False)
    # closed loops
    for s in range(nseg):
        if used[s]:
            continue
        start = seg[s, 0]
        cur_e = start
        cur_s = s
        out[nout] = cur_e
        nout += 1
        while cur_s >= 0 and not used[cur_s]:
            used[cur_s] = 1
            cur_e = seg[cur_s, 1] if seg[cur_s, 0] == cur_e else seg[cur_s, 0]
            out[nout] = cur_e
            nout += 1
            a = slot[cur_e, 0]
            b = slot[cur_e, 1]
            cur_s = b if a == cur_s else a
        nout -= 1  # drop the repeated start edge
        offsets.append(nout)
        closed.append(True)
    return (out_np[:nout].copy(), np.asarray(offsets, dtype=np.int64),
            np.asarray(closed, dtype=bool))


cdef Py_ssize_t _find(cnp.int64_t[::1] parent, Py_ssize_t a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def label_components(Py_ssize_t n, edges):
    cdef cnp.int64_t[:, ::1] E = np.ascontiguousarray(
        np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    parent_np = np.arange(n, dtype=np.int64)
    cdef cnp.int64_t[::1] parent = parent_np
    cdef Py_ssize_t i, ra, rb
    for i in range(E.shape[0]):
        ra = _find(parent, E[i, 0])
        rb = _find(parent, E[i, 1])
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    labels_np = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] labels = labels_np
    cdef Py_ssize_t nlab = 0
    remap_np = np.full(n, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] remap = remap_np
    for i in range(n):
        ra = _find(parent, i)
        if remap[ra] < 0:
            remap[ra] = nlab
            nlab += 1
        labels[i] = remap[ra]
    return labels_np


def segment_crossings(xy):
    cdef double[:, ::1] P = np.ascontiguousarray(xy, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], i, j, jn, jmax
    cdef double pix, piy, dix, diy, pjx, pjy, djx, djy
    cdef double o1, o2, o3, o4, s, min_sin = 1.0
    cdef long count = 0
    for i in range(n - 2):
        pix = P[i, 0]
        piy = P[i, 1]
        dix = P[i + 1, 0] - pix
        diy = P[i + 1, 1] - piy
        jmax = n if i > 0 else n - 1
        for j in range(i + 2, jmax):
            jn = j + 1 if j + 1 < n else 0
            pjx = P[j, 0]
            pjy = P[j, 1]
            djx = P[jn, 0] - pjx
            djy = P[jn, 1] - pjy
            o1 = dix * (pjy - piy) - diy * (pjx - pix)
            o2 = dix * (pjy + djy - piy) - diy * (pjx + djx - pix)
            if o1 * o2 >= 0:
                continue
            o3 = djx * (piy - pjy) - djy * (pix - pjx)
            o4 = djx * (piy + diy - pjy) - djy * (pix + dix - pjx)
            if o3 * o4 >= 0:
                continue
            count += 1
            s = fabs(dix * djy - diy * djx) / (sqrt(dix * dix + diy * diy) * sqrt(djx * djx + djy * djy))
            if s < min_sin:
                min_sin = s
    return int(count), float(min_sin)


def min_pair_distance(pts, Py_ssize_t gap):
    cdef double[:, ::1] P = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], dim = P.shape[1], i, j, c
    cdef double best = INFINITY, acc, t
    for i in range(n):
        for j in range(i + gap, n):
            if j - i > n - gap:
                break
            acc = 0.0
            for c in range(dim):
                t = P[j, c] - P[i, c]
                acc += t * t
            if acc < best:
                best = acc
    return sqrt(best) if best < INFINITY else float("inf")
