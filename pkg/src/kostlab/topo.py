"""Topological invariants of extracted singularities.

Betti summaries of point clouds and curves, a numerical Morse audit for
height functions on closed curves, the C^0 perturbation experiment, and
component-count histograms with total-variation distances.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import DegenerateDirection, DegenerateSample
from .polycore import KostlanSpec, PolynomialMap, sample_kostlan
from .seeding import philox, substream_seed
from .singulab import charts as ch
from .singulab.catalog import SingularityClass, codimension
from .singulab.circle import circle_roots, scan_size
from .singulab.curves import (SPHERE_REFINE, as_scalar_field, cell_size, extract_zero_curve,
                              feature_degree)
from .singulab.points import find_singular_points, seed_spacing
from .singulab.results import CurveResult, PointCloudResult

DIRECTION_TOL = 1e-12
SUP_MARGIN = 1.05


@dataclass(frozen=True)
class BettiSummary:
    b0: int
    b1: int
    interior_b0: int
    clipped_b0: int


# ---------------------------------------------------------------- Betti numbers

def _curve_graph(polylines, decimals=12):
    """Vertices merged by position, plus the segment edges between them."""
    pts = [np.asarray(p, dtype=np.float64) for p in polylines if len(p)]
    if not pts:
        return np.zeros((0, 2)), np.zeros((0, 2), dtype=np.int64)
    allp = np.concatenate(pts)
    _, ids = np.unique(np.round(allp, decimals), axis=0, return_inverse=True)
    ids = ids.ravel()
    edges, start = [], 0
    for p in pts:
        i = ids[start:start + len(p)]
        edges.append(np.column_stack([i[:-1], i[1:]]))
        start += len(p)
    edges = np.concatenate(edges)
    edges = edges[edges[:, 0] != edges[:, 1]]
    uniq = np.zeros((ids.max() + 1, allp.shape[1]))
    uniq[ids] = allp
    return uniq, np.unique(np.sort(edges, axis=1), axis=0)


def betti_of(result, radius=None) -> BettiSummary:
    """``b0``, ``b1`` and the interior / clipped split against the reference disk.

    Curve components are recomputed by union-find over vertices merged by
    position, so the answer does not depend on how fragments are ordered.
    """
    if isinstance(result, PointCloudResult):
        n = result.count
        if radius is None or result.points.shape[1] == 3:
            return BettiSummary(n, 0, n, n)
        r = np.linalg.norm(result.points, axis=1)
        return BettiSummary(n, 0, int((r < radius).sum()), int((r <= radius).sum()))
    if not isinstance(result, CurveResult):
        raise TypeError(f"cannot summarize {type(result).__name__}")
    nodes, edges = _curve_graph(result.polylines)
    if not len(nodes):
        return BettiSummary(0, 0, 0, 0)
    labels = kernels.label_components(len(nodes), edges)
    b0 = int(labels.max()) + 1
    deg = np.bincount(edges.ravel(), minlength=len(nodes))
    closed = np.ones(b0, dtype=bool)
    closed[labels[deg != 2]] = False
    r = result.reference_radius if radius is None else radius
    if result.domain != "disk" or r is None:
        return BettiSummary(b0, int(closed.sum()), b0, b0)
    rad = np.hypot(nodes[:, 0], nodes[:, 1])
    inside = np.ones(b0, dtype=bool)
    inside[labels[rad >= r]] = False
    meets = np.zeros(b0, dtype=bool)
    meets[labels[rad <= r]] = True
    return BettiSummary(b0, int(closed.sum()), int((inside & closed).sum()), int(meets.sum()))


# ---------------------------------------------------------------- Morse audit

def critical_counts(curve: CurveResult, direction) -> np.ndarray:
    """Critical points of the height ``<direction, .>`` on each closed polyline."""
    a = np.asarray(direction, dtype=np.float64)
    a = a / np.linalg.norm(a)
    out = []
    for poly, closed in zip(curve.polylines, curve.closed):
        if not closed:
            raise ValueError("Morse audit needs closed components")
        seg = np.diff(poly[:, :len(a)], axis=0)
        dg = seg @ a
        length = np.linalg.norm(seg, axis=1)
        if np.any(np.abs(dg) <= DIRECTION_TOL * np.maximum(length, 1e-300)):
            raise DegenerateDirection("segment orthogonal to the height gradient")
        s = np.sign(dg)
        out.append(int(np.count_nonzero(s != np.roll(s, -1))))
    return np.asarray(out, dtype=np.int64)


def morse_audit(curve: CurveResult, direction):
    """``(crit_count, passed)`` with ``passed = b0 <= crit/2`` and even counts per component."""
    per = critical_counts(curve, direction)
    crit = int(per.sum())
    b0 = betti_of(curve).b0
    return crit, bool(b0 <= crit / 2 and np.all(per % 2 == 0))


def random_direction(rng, dim=3):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def morse_audit_retry(curve, rng, tries=10):
    """Audit with random directions, retrying on degenerate ones."""
    for _ in range(tries):
        try:
            return morse_audit(curve, random_direction(rng, curve.polylines[0].shape[1]))
        except DegenerateDirection:
            continue
    raise DegenerateDirection(f"no generic direction in {tries} tries")


# ---------------------------------------------------------------- semicontinuity

MODES = ("trigonometric-bump", "random-high-degree")


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbation of sup-norm at most ``amplitude`` (``None`` picks it from the margin)."""

    amplitude: float | None = None
    omega: float = 40.0  # frequency, or the degree d' in random-high-degree mode
    mode: str = "trigonometric-bump"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.amplitude is not None and self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")


@dataclass
class SemicontinuityResult:
    b0_base: int
    b0_pert: int
    both_transversal: bool
    amplitude: float
    flags: dict = field(default_factory=dict)


def _circle_base(f):
    if isinstance(f, PolynomialMap):
        if f.m != 1 or f.k != 1:
            raise ValueError("need m = k = 1 on S^1")
        return ch.CirclePolyField(f), f.d
    return f, getattr(f, "degree", 1)


def _circle_margin(field, d, roots):
    n = scan_size(d)
    theta = ch.scan_angles(n)
    vals = np.abs(field.values(theta))
    h = seed_spacing(d)
    if len(roots):
        gap = np.abs(theta[:, None] - roots[None, :])
        gap = np.minimum(gap, 2 * np.pi - gap).min(axis=1)
        vals = vals[gap > h]
    return float(vals.min()) if len(vals) else 0.0


def _sphere_margin(field, curve):
    h = curve.h
    N = int(math.ceil(2.0 / h))
    t = np.linspace(-1.0, 1.0, N + 1)
    tree = cKDTree(np.concatenate(curve.polylines)) if curve.polylines else None
    best = np.inf
    for face in ch.FACES:
        v = np.abs(field.grid(face.index, t, t)).ravel()
        if tree is not None:
            x = ch.face_grid_points(face.index, t, t).reshape(-1, 3)
            v = v[tree.query(x, distance_upper_bound=h)[0] > h]
        if len(v):
            best = min(best, float(v.min()))
    return best if np.isfinite(best) else 0.0


def _perturbation(spec: PerturbationSpec, domain, eps, d):
    rng = philox(spec.seed, 0x70657274)
    if spec.mode == "trigonometric-bump":
        phase = rng.uniform(0, 2 * np.pi)
        if domain == "circle":
            return ch.TrigBumpCircle(eps, spec.omega, phase)
        return ch.TrigBumpSphere(eps, spec.omega, random_direction(rng), phase)
    dp = int(spec.omega)
    m = 1 if domain == "circle" else 2
    q = sample_kostlan(KostlanSpec(m, 1, dp, substream_seed(spec.seed, "perturbation")))
    if domain == "circle":
        base = ch.CirclePolyField(q)
        sup = np.abs(base.values(2 * np.pi * np.arange(4 * scan_size(dp)) / (4 * scan_size(dp))))
        sup = float(sup.max())
    else:
        base = ch.SpherePolyField(q).scalar(0)
        hh = cell_size(max(d, dp), refine=SPHERE_REFINE)
        t = np.linspace(-1.0, 1.0, int(math.ceil(2.0 / hh)) + 1)
        sup = max(float(np.abs(base.grid(f.index, t, t)).max()) for f in ch.FACES)
    return ch.ScaledField(base, eps / (SUP_MARGIN * sup))


def _circle_b0(field):
    return len(circle_roots(field)[0])


def semicontinuity_trial(baseline, spec: PerturbationSpec) -> SemicontinuityResult:
    """Zero-set component counts of ``f`` and of ``f + p`` with ``sup |p| <= eps``.

    With ``spec.amplitude=None``, ``eps`` is half the minimum of ``|f|``
    outside the ``h``-tube around the baseline zero set.
    """
    circle = (isinstance(baseline, PolynomialMap) and baseline.m == 1) or \
        getattr(baseline, "kind", None) == "circle"
    if circle:
        base, d = _circle_base(baseline)
        roots = circle_roots(base)[0]
        b0_base = len(roots)
        eps = 0.5 * _circle_margin(base, d, roots) if spec.amplitude is None else spec.amplitude
        if eps == 0:
            return SemicontinuityResult(b0_base, b0_base, True, 0.0)
        pert = ch.SumField(base, _perturbation(spec, "circle", eps, d))
        try:
            b0_pert = _circle_b0(pert)
        except DegenerateSample as exc:
            return SemicontinuityResult(b0_base, -1, False, eps, {"reason": exc.reason})
        return SemicontinuityResult(b0_base, b0_pert, True, eps)
    base = as_scalar_field(baseline)
    d = feature_degree(base)
    curve = extract_zero_curve(base)
    b0_base = betti_of(curve).b0
    eps = 0.5 * _sphere_margin(base, curve) if spec.amplitude is None else spec.amplitude
    if eps == 0:
        return SemicontinuityResult(b0_base, b0_base, True, 0.0)
    pert = ch.SumField(base, _perturbation(spec, "sphere", eps, d))
    try:
        b0_pert = betti_of(extract_zero_curve(pert)).b0
    except DegenerateSample as exc:
        return SemicontinuityResult(b0_base, -1, False, eps, {"reason": exc.reason})
    return SemicontinuityResult(b0_base, b0_pert, True, eps)


# ---------------------------------------------------------------- histograms

@dataclass
class Histogram:
    counts: dict
    discarded: int = 0

    @property
    def trials(self) -> int:
        return sum(self.counts.values())

    def probabilities(self) -> dict:
        n = self.trials
        return {k: v / n for k, v in sorted(self.counts.items())} if n else {}

    @classmethod
    def from_values(cls, values, discarded=0):
        return cls(dict(Counter(int(v) for v in values)), discarded)


def _probs(h):
    if isinstance(h, Histogram):
        return h.probabilities()
    if isinstance(h, dict):
        s = sum(h.values())
        return {k: v / s for k, v in h.items()}
    h = np.asarray(h, dtype=np.float64)
    return {i: v / h.sum() for i, v in enumerate(h) if v}


def tv_distance(h1, h2) -> float:
    """Half the L1 distance of two normalized histograms."""
    p, q = _probs(h1), _probs(h2)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


def interior_count(field, cls: SingularityClass, radius=1.0) -> int:
    """Interior component count of the class locus of a disk field in D^m."""
    m = field.m
    if codimension(cls, m) == m:
        return betti_of(find_singular_points(field, cls), radius).interior_b0
    return betti_of(extract_zero_curve(field, cls, radius=radius), radius).interior_b0


def betti_histogram(sampler, cls: SingularityClass, d, trials, seed=0, radius=1.0,
                    statistic=interior_count) -> Histogram:
    """Histogram of ``statistic`` over ``sampler(d, trial_seed)`` fields.

    Trial seeds do not depend on ``d``, so samplers built on a shared
    coefficient table give coupled histograms across degrees.
    """
    if trials < 200:
        raise ValueError("betti_histogram needs at least 200 trials")
    values, discarded = [], 0
    for i in range(trials):
        try:
            values.append(statistic(sampler(d, substream_seed(seed, "betti", i)), cls, radius))
        except DegenerateSample:
            discarded += 1
    return Histogram.from_values(values, discarded)


def format_histogram(h: Histogram) -> str:
    return "".join(f"{k} {p:.17g}\n" for k, p in h.probabilities().items())


def dump_histogram(h: Histogram, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_histogram(h))
