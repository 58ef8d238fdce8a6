"""Singularity catalog and numerical extraction of ``j^r psi^{-1}(W)``."""
from .catalog import (CriticalPoints, CuspPoints, FoldCurve, Minima, SingularityClass,
                      ZeroSet, codimension)
from .circle import circle_critical_points, find_zeros_circle
from .curves import extract_zero_curve, flood_fill_b0
from .cusps import find_cusps, fold_curve
from .dumps import dump_result, format_result, load_components
from .knots import KnotResult, analyze_curve, sample_knot
from .points import find_singular_points
from .results import CurveResult, PointCloudResult

__all__ = [
    "SingularityClass", "ZeroSet", "CriticalPoints", "Minima", "FoldCurve", "CuspPoints",
    "codimension", "find_zeros_circle", "circle_critical_points", "find_singular_points",
    "extract_zero_curve", "flood_fill_b0", "find_cusps", "fold_curve", "sample_knot",
    "analyze_curve", "KnotResult", "PointCloudResult", "CurveResult", "dump_result",
    "format_result", "load_components",
]
