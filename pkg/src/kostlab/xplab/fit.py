"""Log-log least-squares fits of mean statistics against the degree."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    slope_se: float
    r2: float
    degrees: tuple

    def predict(self, d):
        return math.exp(self.intercept) * d ** self.slope


def fit_power_law(degrees, means) -> ScalingFit:
    """OLS of ``log mean`` on ``log d``; needs three or more degrees and positive means."""
    d = np.asarray(degrees, dtype=np.float64)
    y = np.asarray(means, dtype=np.float64)
    if len(d) < 3:
        raise ValueError("a scaling fit needs at least 3 degrees")
    if np.any(y <= 0) or np.any(d <= 0):
        raise ValueError("degrees and means must be strictly positive")
    x, ly = np.log(d), np.log(y)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * x + intercept)
    sxx = float(((x - x.mean()) ** 2).sum())
    dof = len(x) - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    sst = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return ScalingFit(float(slope), float(intercept), se, r2, tuple(int(v) for v in degrees))


def degree_means(records, statistic):
    """Per-degree ``(mean, standard error, n)`` over non-discarded records."""
    by_d = {}
    for r in records:
        if r.statistic == statistic and not r.discarded:
            by_d.setdefault(r.d, []).append(r.value)
    out = {}
    for d in sorted(by_d):
        v = np.asarray(by_d[d])
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        out[d] = (float(v.mean()), se, len(v))
    return out


def scaling_fit(records, statistic) -> ScalingFit:
    means = degree_means(records, statistic)
    return fit_power_law(list(means), [m for m, _, _ in means.values()])
