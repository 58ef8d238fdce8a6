"""The fixed catalog of intrinsic singularity classes W."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnsupportedClass
from ..polycore import SphericalJet

NAMES = ("ZeroSet", "CriticalPoints", "Minima", "FoldCurve", "CuspPoints")


@dataclass(frozen=True)
class SingularityClass:
    """A jet-space subset W: name, jet order, codimension, target dimension."""

    name: str
    order: int
    codim: int
    k: int
    m: int | None = None  # required source dimension, if any

    def __post_init__(self):
        if self.name not in NAMES:
            raise UnsupportedClass(f"unknown class {self.name!r}")

    @property
    def is_open_condition(self):
        return self.name == "Minima"

    def check_dimension(self, m):
        if self.m is not None and m != self.m:
            raise UnsupportedClass(f"{self.name} needs m = {self.m}, got {m}")
        return codimension(self, m) == m

    def residual(self, jet: SphericalJet) -> np.ndarray:
        """Defining residual F evaluated on a spherical jet (zero on W)."""
        if jet.order < self.order:
            raise ValueError(f"{self.name} needs a jet of order {self.order}")
        if self.name == "ZeroSet":
            return np.asarray(jet.value, dtype=np.float64)
        if self.name in ("CriticalPoints", "Minima"):
            return np.asarray(jet.gradient[0], dtype=np.float64)
        if self.name == "FoldCurve":
            return np.array([np.linalg.det(jet.gradient)])
        raise UnsupportedClass("cusp residual needs third-order data along the fold; "
                               "use find_cusps")

    def accepts(self, jet: SphericalJet, tol=1e-9) -> bool:
        """Openness constraint (Minima: Hessian positive definite)."""
        if self.name != "Minima":
            return True
        return bool(np.linalg.eigvalsh(jet.hessian[0]).min() > tol)


def ZeroSet(k: int = 1) -> SingularityClass:
    return SingularityClass("ZeroSet", 0, k, k)


CriticalPoints = SingularityClass("CriticalPoints", 1, -1, 1)
Minima = SingularityClass("Minima", 2, -1, 1)
FoldCurve = SingularityClass("FoldCurve", 1, 1, 2, m=2)
CuspPoints = SingularityClass("CuspPoints", 3, 2, 2, m=2)


def codimension(cls: SingularityClass, m: int) -> int:
    """Codimension in ``S^m``; critical points and minima have codim ``m``."""
    return m if cls.codim < 0 else cls.codim
