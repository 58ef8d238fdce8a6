"""Value objects returned by the extractors."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class PointCloudResult:
    points: np.ndarray  # (n, dim): unit vectors, angles embedded as (cos, sin), or disk points
    residuals: np.ndarray
    iterations: np.ndarray
    conditions: np.ndarray
    charts: np.ndarray
    dedup_radius: float
    h: float
    flags: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.points)

    def __len__(self):
        return len(self.points)


def empty_points(dim, h, dedup_radius=0.0, **flags):
    return PointCloudResult(np.zeros((0, dim)), np.zeros(0), np.zeros(0, dtype=np.int64),
                            np.zeros(0), np.zeros(0, dtype=np.int64), dedup_radius, h, dict(flags))


@dataclass(eq=False)
class CurveResult:
    """Stitched polylines.  Closed polylines repeat their first vertex at the end."""

    polylines: list
    closed: np.ndarray
    charts: list  # per polyline, chart id of each vertex
    h: float
    domain: str  # "sphere" or "disk"
    n_nodes: int = 0
    n_links: int = 0
    reference_radius: float | None = None
    flags: dict = field(default_factory=dict)

    @property
    def b0(self) -> int:
        return len(self.polylines)

    @property
    def b1(self) -> int:
        return int(np.count_nonzero(self.closed))

    def interior_mask(self, radius=None):
        """Components with every vertex strictly inside the reference disk."""
        r = self.reference_radius if radius is None else radius
        if r is None or self.domain != "disk":
            return np.ones(len(self.polylines), dtype=bool)
        return np.array([bool(c) and np.all(np.hypot(p[:, 0], p[:, 1]) < r)
                         for p, c in zip(self.polylines, self.closed)], dtype=bool)

    def meets_mask(self, radius=None):
        r = self.reference_radius if radius is None else radius
        if r is None or self.domain != "disk":
            return np.ones(len(self.polylines), dtype=bool)
        return np.array([np.any(np.hypot(p[:, 0], p[:, 1]) <= r) for p in self.polylines],
                        dtype=bool)
