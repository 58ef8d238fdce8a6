"""Random knots ``k_d = X_d|_{dD^2}`` for ``m = 2, k = 3``: embedding audit and crossings."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import special_ortho_group

from .. import kernels
from ..errors import DegenerateSample
from ..fields import RescaledField, sample_coupled, truncation_order
from ..polycore import KostlanSpec, sample_kostlan
from ..seeding import philox

EMBED_TOL = 1e-6
TANGENT_SIN = 1e-3
RETRIES = 5
COUPLED_EPS = 1e-6


@dataclass(eq=False)
class KnotResult:
    points: np.ndarray  # (n, 3) closed curve samples, first vertex not repeated
    crossings: int
    min_distance: float
    min_sin: float
    retries: int
    rotation: np.ndarray

    @property
    def embedded(self) -> bool:
        return self.min_distance > EMBED_TOL


def min_points(d) -> int:
    return 64 * math.ceil(math.sqrt(d))


def index_gap(n, separation) -> int:
    """Smallest cyclic index gap whose angular separation exceeds ``separation``."""
    return int(math.floor(separation / (2 * math.pi / n))) + 1


def analyze_curve(points, gap, rng=None, retries=RETRIES) -> KnotResult:
    """Embedding audit plus crossing count of a generic planar projection.

    The projection is onto the first two coordinates, re-randomized by a
    random rotation whenever a crossing is nearly tangential.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    dmin = kernels.min_pair_distance(pts, gap)
    if not dmin > EMBED_TOL:
        raise DegenerateSample("curve fails the embedding audit", min_distance=dmin)
    R = np.eye(3)
    for attempt in range(retries + 1):
        count, min_sin = kernels.segment_crossings(np.ascontiguousarray((pts @ R.T)[:, :2]))
        if min_sin >= TANGENT_SIN:
            return KnotResult(pts, int(count), dmin, min_sin, attempt, R)
        if rng is None:
            rng = np.random.default_rng(attempt)
        R = special_ortho_group.rvs(3, random_state=rng)
    raise DegenerateSample("near-tangential crossings after projection retries",
                           min_sin=min_sin)


def knot_field(d, seed, representation="kostlan"):
    """The disk field whose boundary restriction is the knot."""
    if representation == "kostlan":
        return RescaledField(sample_kostlan(KostlanSpec(2, 3, d, seed)))
    if representation == "coupled":
        D = truncation_order(1.0, COUPLED_EPS, 2, 3)
        return sample_coupled(2, 3, D, seed).view(d)
    raise ValueError(f"unknown representation {representation!r}")


def sample_knot(d, n_points=None, seed=0, representation="kostlan") -> KnotResult:
    """Sample ``k_d`` at ``n_points`` uniform angles, audit it and count crossings."""
    n = min_points(d) if n_points is None else int(n_points)
    if n < min_points(d):
        raise ValueError(f"n_points must be >= {min_points(d)}")
    theta = 2 * np.pi * np.arange(n) / n
    u = np.column_stack([np.cos(theta), np.sin(theta)])
    pts = knot_field(d, seed, representation).jet(u, 0)[0]
    return analyze_curve(pts, index_gap(n, 3.0 / math.sqrt(d)), philox(seed, 0x6B6E6F74))


def circle_curve(n=256):
    t = 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(t), np.sin(t), np.zeros(n)])


def trefoil_curve(n=512):
    t = 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.sin(t) + 2 * np.sin(2 * t),
                            np.cos(t) - 2 * np.cos(2 * t),
                            -np.sin(3 * t)])
