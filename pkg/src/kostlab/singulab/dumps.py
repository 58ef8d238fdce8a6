"""Plain-text dumps of extracted points and curves.

One vertex per line, ``chart_id x y z``; components are separated by a
blank line.  Disk points are written with ``z = 0``.
"""
from __future__ import annotations

import numpy as np

from .results import CurveResult, PointCloudResult


def _rows(points, charts):
    p = np.asarray(points, dtype=np.float64)
    if p.shape[1] == 2:
        p = np.column_stack([p, np.zeros(len(p))])
    return [f"{int(c)} {x:.17g} {y:.17g} {z:.17g}" for c, (x, y, z) in zip(charts, p)]


def format_result(result) -> str:
    if isinstance(result, CurveResult):
        blocks = ["\n".join(_rows(p, c)) for p, c in zip(result.polylines, result.charts)]
        return "\n\n".join(blocks) + ("\n" if blocks else "")
    if isinstance(result, PointCloudResult):
        rows = _rows(result.points, result.charts)
        return "\n\n".join(rows) + ("\n" if rows else "")
    raise TypeError(f"cannot dump {type(result).__name__}")


def dump_result(result, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_result(result))


def load_components(path):
    """Read a dump back as a list of ``(charts, (n, 3) vertices)`` per component."""
    comps, cur = [], []
    with open(path) as fh:
        for line in list(fh) + [""]:
            line = line.strip()
            if not line:
                if cur:
                    a = np.array(cur)
                    comps.append((a[:, 0].astype(np.int64), a[:, 1:]))
                    cur = []
                continue
            cur.append([float(v) for v in line.split()])
    return comps
