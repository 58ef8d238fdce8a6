"""Pure-Python/numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` one-for-one and are used whenever the compiled
module is unavailable (or ``KOSTLAB_PURE_PYTHON=1`` is set).
"""
import numpy as np

# Marching-squares segment table: case -> list of (edge, edge) pairs.
# Corners c0=(i,j) c1=(i+1,j) c2=(i+1,j+1) c3=(i,j+1); edges e0=c0c1, e1=c1c2,
# e2=c3c2, e3=c0c3.  Saddles 5 and 10 are resolved from the centre value.
_CASES = {
    0: (), 15: (),
    1: ((3, 0),), 2: ((0, 1),), 3: ((3, 1),), 4: ((1, 2),),
    6: ((0, 2),), 7: ((2, 3),), 8: ((2, 3),), 9: ((0, 2),),
    11: ((1, 2),), 12: ((1, 3),), 13: ((0, 1),), 14: ((3, 0),),
}
_SADDLE = {
    (5, True): ((0, 1), (2, 3)), (5, False): ((3, 0), (1, 2)),
    (10, True): ((3, 0), (1, 2)), (10, False): ((0, 1), (2, 3)),
}


def _cell_edges(i, j, n0, n1):
    na = (n0 - 1) * n1
    return (
        i * n1 + j,                   # e0: a-edge at (i, j)
        na + (i + 1) * (n1 - 1) + j,  # e1: b-edge at (i+1, j)
        i * n1 + j + 1,               # e2: a-edge at (i, j+1)
        na + i * (n1 - 1) + j,        # e3: b-edge at (i, j)
    )


def trace_contours(f, center):
    """Trace the zero level set of a grid function into chains of edge ids.

    Returns ``(edges, offsets, closed)``: chain ``c`` is
    ``edges[offsets[c]:offsets[c+1]]``; closed chains do not repeat their
    first edge.  A-edges ``(i,j)-(i+1,j)`` have id ``i*n1+j``; b-edges
    ``(i,j)-(i,j+1)`` have id ``(n0-1)*n1 + i*(n1-1) + j``.
    """
    f = np.ascontiguousarray(f, dtype=np.float64)
    center = np.ascontiguousarray(center, dtype=np.float64)
    n0, n1 = f.shape
    pos = f > 0
    case = (pos[:-1, :-1].astype(np.int64)
            | (pos[1:, :-1].astype(np.int64) << 1)
            | (pos[1:, 1:].astype(np.int64) << 2)
            | (pos[:-1, 1:].astype(np.int64) << 3))
    nedges = (n0 - 1) * n1 + n0 * (n1 - 1)
    segs = []
    for i, j in zip(*np.nonzero((case != 0) & (case != 15))):
        c = int(case[i, j])
        pairs = _SADDLE[(c, bool(center[i, j] > 0))] if c in (5, 10) else _CASES[c]
        ce = _cell_edges(int(i), int(j), n0, n1)
        for p, q in pairs:
            segs.append((ce[p], ce[q]))
    slot = np.full((nedges, 2), -1, dtype=np.int64)
    for s, (p, q) in enumerate(segs):
        for e in (p, q):
            if slot[e, 0] < 0:
                slot[e, 0] = s
            else:
                slot[e, 1] = s
    used = np.zeros(len(segs), dtype=bool)
    edges, offsets, closed = [], [0], []

    def walk(start_edge, start_seg):
        chain = [start_edge]
        e, s = start_edge, start_seg
        while s >= 0 and not used[s]:
            used[s] = True
            p, q = segs[s]
            e = q if p == e else p
            chain.append(e)
            a, b = slot[e]
            s = b if a == s else a
        return chain

    # open chains start at edges touched by a single segment
    ends = np.nonzero((slot[:, 0] >= 0) & (slot[:, 1] < 0))[0]
    for e in ends:
        s = slot[e, 0]
        if used[s]:
            continue
        chain = walk(int(e), int(s))
        edges.extend(chain)
        offsets.append(len(edges))
        closed.append(False)
    for s in range(len(segs)):
        if used[s]:
            continue
        chain = walk(segs[s][0], s)
        chain.pop()  # back at the start edge
        edges.extend(chain)
        offsets.append(len(edges))
        closed.append(True)
    return (np.asarray(edges, dtype=np.int64), np.asarray(offsets, dtype=np.int64),
            np.asarray(closed, dtype=bool))


def label_components(n, edges):
    """Union-find labels ``0..c-1`` for ``n`` nodes joined by ``edges``."""
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
        ra, rb = find(int(a)), find(int(b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    _, labels = np.unique(roots, return_inverse=True)
    return labels.astype(np.int64)


def segment_crossings(xy):
    """Count proper crossings between non-adjacent segments of a closed polygon.

    Returns ``(count, min_sin)`` where ``min_sin`` is the smallest
    ``|sin angle|`` among crossing pairs (1.0 when there are none).
    """
    p = np.ascontiguousarray(xy, dtype=np.float64)
    n = len(p)
    q = np.roll(p, -1, axis=0)
    d = q - p
    count, min_sin = 0, 1.0
    norms = np.hypot(d[:, 0], d[:, 1])
    for i in range(n - 2):
        j = np.arange(i + 2, n if i > 0 else n - 1)
        if len(j) == 0:
            continue
        cr = lambda ax, ay, bx, by: ax * by - ay * bx
        o1 = cr(d[i, 0], d[i, 1], p[j, 0] - p[i, 0], p[j, 1] - p[i, 1])
        o2 = cr(d[i, 0], d[i, 1], q[j, 0] - p[i, 0], q[j, 1] - p[i, 1])
        o3 = cr(d[j, 0], d[j, 1], p[i, 0] - p[j, 0], p[i, 1] - p[j, 1])
        o4 = cr(d[j, 0], d[j, 1], q[i, 0] - p[j, 0], q[i, 1] - p[j, 1])
        hit = (o1 * o2 < 0) & (o3 * o4 < 0)
        if hit.any():
            jj = j[hit]
            count += int(hit.sum())
            s = np.abs(cr(d[i, 0], d[i, 1], d[jj, 0], d[jj, 1])) / (norms[i] * norms[jj])
            min_sin = min(min_sin, float(s.min()))
    return count, min_sin


def min_pair_distance(pts, gap):
    """Smallest distance between closed-curve samples at cyclic index gap >= ``gap``."""
    p = np.ascontiguousarray(pts, dtype=np.float64)
    n = len(p)
    best = np.inf
    for i in range(n):
        j = np.arange(i + gap, n)
        j = j[(j - i) <= n - gap]
        if len(j):
            best = min(best, float(np.sqrt(((p[j] - p[i]) ** 2).sum(axis=1)).min()))
    return best
