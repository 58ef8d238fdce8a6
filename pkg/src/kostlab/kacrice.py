"""Expected counts: closed forms, Kac-Rice densities and the square-root-law constant."""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from .errors import IllConditioned, UnsupportedClass
from .fields import BargmannFockField, KernelSpec, kernel_jet_covariance, weighted_field_Y
from .seeding import philox, substream_seed
from .singulab.catalog import SingularityClass
from .singulab.points import disk_points

COND_MAX = 1e10
METHODS = ("closed-form", "kac-rice-mc", "empirical")


@dataclass(frozen=True)
class ExpectedCount:
    value: float
    stderr: float
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.value < 0:
            raise ValueError("expected counts are nonnegative")


@dataclass(eq=False)
class DensityProfile:
    points: np.ndarray  # (n, m)
    values: np.ndarray
    stderrs: np.ndarray
    kernel: KernelSpec
    cls: SingularityClass


def sphere_volume(m) -> float:
    """Volume of the unit sphere ``S^m``."""
    return 2 * pi ** ((m + 1) / 2) / gamma((m + 1) / 2)


def ball_volume(m) -> float:
    return pi ** (m / 2) / gamma(m / 2 + 1)


# ---------------------------------------------------------------- closed forms

def expected_zeros_closed_form(m, d) -> ExpectedCount:
    """``2 d^{m/2}``: the projective count ``d^{m/2}`` doubled on the sphere."""
    return ExpectedCount(2.0 * d ** (m / 2), 0.0, "closed-form")


def cartwright_sturmfels_bound(m, d) -> int:
    """``2(d-1)^m + (d-1)^{m-1} + ... + (d-1) + 1``."""
    if d < 2:
        raise ValueError("the bound needs d >= 2")
    return 2 * (d - 1) ** m + sum((d - 1) ** i for i in range(m))


def antipodal_critical_bound(m, d) -> int:
    """``2 * sum_{i<=m} (d-1)^i``: two antipodal critical points per eigenvector."""
    if d < 2:
        raise ValueError("the bound needs d >= 2")
    return 2 * sum((d - 1) ** i for i in range(m + 1))


# ---------------------------------------------------------------- Kac-Rice

def _check_class(cls: SingularityClass, kernel: KernelSpec):
    if cls.name != "ZeroSet":
        raise UnsupportedClass(f"Kac-Rice density for {cls.name} needs jets of order 2")
    if cls.k != kernel.m or kernel.k != kernel.m:
        raise UnsupportedClass("Kac-Rice density needs k = m")


def kac_rice_density(cls: SingularityClass, kernel: KernelSpec, u, mc_samples=100_000,
                     seed=0):
    """``rho(u) = p_F(0) E{|det dF| | F = 0}`` with the expectation by Monte Carlo.

    Returns ``(rho, stderr)``.  Draws depend only on ``seed``, so densities
    for different kernels at the same seed use common random numbers.
    """
    _check_class(cls, kernel)
    m, k = kernel.m, kernel.k
    u = np.asarray(u, dtype=np.float64).reshape(m)
    C = kernel_jet_covariance(kernel, u, 1)
    idx_f = np.arange(k) * (1 + m)
    Cf = C[np.ix_(idx_f, idx_f)]
    if not np.all(np.isfinite(C)) or np.linalg.cond(Cf) > COND_MAX:
        raise IllConditioned("value covariance is ill-conditioned")
    dens = 1.0 / np.sqrt(np.linalg.det(2 * pi * Cf))
    # components are independent, so each gradient row conditions on its own value
    blk = C[:1 + m, :1 + m]
    S = blk[1:, 1:] - np.outer(blk[1:, 0], blk[0, 1:]) / blk[0, 0]
    L = np.linalg.cholesky(0.5 * (S + S.T) + 1e-300 * np.eye(m))
    z = philox(seed, 0x6B72).standard_normal((mc_samples, k, m))
    J = z @ L.T
    a = np.abs(np.linalg.det(J)) if m > 1 else np.abs(J[:, 0, 0])
    return float(dens * a.mean()), float(dens * a.std(ddof=1) / np.sqrt(mc_samples))


def density_profile(cls, kernel: KernelSpec, points, mc_samples=100_000, seed=0):
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    vals, ses = [], []
    for i, u in enumerate(pts):
        r, s = kac_rice_density(cls, kernel, u, mc_samples, substream_seed(seed, "rho", i))
        vals.append(r)
        ses.append(s)
    return DensityProfile(pts, np.array(vals), np.array(ses), kernel, cls)


def integrate_expected_count(profile: DensityProfile, volume=None) -> ExpectedCount:
    """Uniform Monte Carlo integral ``vol(A) * mean(rho)`` over the profile's points.

    ``volume`` defaults to the unit ball ``D^m``.
    """
    m = profile.points.shape[1]
    vol = ball_volume(m) if volume is None else volume
    v = profile.values
    n = len(v)
    var = (v.var(ddof=1) / n if n > 1 else 0.0) + float(np.sum(profile.stderrs ** 2)) / n ** 2
    return ExpectedCount(float(vol * v.mean()), float(vol * np.sqrt(var)), "kac-rice-mc")


def expected_count_disk(cls, kernel: KernelSpec, radius=1.0, quadrature=256,
                        mc_samples=20_000, seed=0) -> ExpectedCount:
    """Expected class count in the disk of ``radius`` by density quadrature."""
    m = kernel.m
    rng = philox(seed, 0x717561)
    g = rng.standard_normal((quadrature, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = radius * g * rng.uniform(size=(quadrature, 1)) ** (1.0 / m)
    prof = density_profile(cls, kernel, pts, mc_samples, seed)
    return integrate_expected_count(prof, ball_volume(m) * radius ** m)


def expected_count_sphere(cls, d, m, mc_samples=100_000, seed=0) -> ExpectedCount:
    """Expected count on ``S^m`` from the invariant density at one point.

    The rescaled chart ``u -> (1, u/sqrt(d))`` has area factor ``d^{-m/2}``
    at ``u = 0`` and the Kostlan law is rotation invariant, so the sphere
    density is ``rho_d(0) d^{m/2}`` everywhere.
    """
    kernel = KernelSpec("rescaled-kostlan", d, m, m)
    rho, se = kac_rice_density(cls, kernel, np.zeros(m), mc_samples, seed)
    scale = d ** (m / 2) * sphere_volume(m)
    return ExpectedCount(rho * scale, se * scale, "kac-rice-mc")


# ---------------------------------------------------------------- C_W

def sqrt_law_factor(m) -> float:
    return m * sphere_volume(m) / sphere_volume(m - 1)


def sqrt_law_constant(cls: SingularityClass, m, trials, seed=0, D=None) -> ExpectedCount:
    """Monte Carlo ``C_W = m vol(S^m)/vol(S^{m-1}) E#{u in D^m : j_u Y_inf in W}``."""
    if trials <= 0:
        raise ValueError("sqrt_law_constant needs trials >= 1")
    if cls.name != "ZeroSet" or cls.k != m:
        raise UnsupportedClass("sqrt_law_constant supports ZeroSet with k = m")
    counts = np.empty(trials)
    for i in range(trials):
        X = BargmannFockField.sample(m, m, substream_seed(seed, "cw", i), D)
        counts[i] = disk_points(weighted_field_Y(X), cls).count
    f = sqrt_law_factor(m)
    se = counts.std(ddof=1) / np.sqrt(trials) if trials > 1 else 0.0
    return ExpectedCount(float(f * counts.mean()), float(f * se), "empirical")


# ---------------------------------------------------------------- dumps

def format_profile(profile: DensityProfile) -> str:
    rows = []
    for u, r, s in zip(profile.points, profile.values, profile.stderrs):
        rows.append(" ".join(f"{x:.17g}" for x in (*u, r, s)))
    return "\n".join(rows) + ("\n" if rows else "")


def dump_profile(profile: DensityProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_profile(profile))
