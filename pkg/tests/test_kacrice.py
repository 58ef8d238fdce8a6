import numpy as np
import pytest

from kostlab.errors import IllConditioned, UnsupportedClass
from kostlab.fields import KernelSpec, sample_coupled, truncation_order
from kostlab.kacrice import (DensityProfile, ExpectedCount, antipodal_critical_bound,
                            ball_volume, cartwright_sturmfels_bound, density_profile,
                            dump_profile, expected_count_disk, expected_count_sphere,
                            expected_zeros_closed_form, format_profile,
                            integrate_expected_count, kac_rice_density, sphere_volume,
                            sqrt_law_constant, sqrt_law_factor)
from kostlab.polycore import KostlanSpec, sample_kostlan
from kostlab.singulab import CriticalPoints, ZeroSet, find_singular_points, find_zeros_circle

BF1 = KernelSpec("bargmann-fock", None, 1, 1)


def test_volumes():
    assert sphere_volume(1) == pytest.approx(2 * np.pi)
    assert sphere_volume(2) == pytest.approx(4 * np.pi)
    assert ball_volume(2) == pytest.approx(np.pi)
    assert sqrt_law_factor(1) == pytest.approx(np.pi)


def test_closed_forms():
    assert expected_zeros_closed_form(1, 100).value == 20.0
    assert expected_zeros_closed_form(2, 1).value == 2.0
    assert expected_zeros_closed_form(2, 9).value == 18.0
    assert cartwright_sturmfels_bound(1, 3) == 5
    assert cartwright_sturmfels_bound(2, 2) == 4
    assert cartwright_sturmfels_bound(1, 2) == 3
    assert antipodal_critical_bound(2, 3) == 2 * (1 + 2 + 4)
    with pytest.raises(ValueError):
        cartwright_sturmfels_bound(1, 1)


def test_degree_two_critical_points():
    # a quadratic form on S^1 has critical points exactly at its +-eigenvectors,
    # so the count is 4 on every generic trial: one above the quoted bound of 3
    from kostlab.singulab import circle_critical_points
    for s in range(50):
        n = circle_critical_points(sample_kostlan(KostlanSpec(1, 1, 2, seed=s))).count
        assert n == 4 == antipodal_critical_bound(1, 2)
        assert n > cartwright_sturmfels_bound(1, 2)


def test_expected_count_validation():
    with pytest.raises(ValueError):
        ExpectedCount(-1.0, 0.0, "empirical")
    with pytest.raises(ValueError):
        ExpectedCount(1.0, 0.0, "guess")


def test_bargmann_fock_density_at_origin():
    rho, se = kac_rice_density(ZeroSet(1), BF1, [0.0], 100_000, seed=1)
    assert abs(rho - 1 / np.pi) < 3 * se


def test_brute_force_crossing_density():
    # stationary field: zeros per unit length, counted by sign changes on a fine grid
    u = np.linspace(-1.0, 1.0, 4001)[:, None]
    D = truncation_order(1.0, 1e-8, 1)
    counts = []
    for s in range(1500):
        v = sample_coupled(1, 1, D, s).view(None).jet(u)[0][:, 0]
        counts.append(np.count_nonzero(np.sign(v[1:]) != np.sign(v[:-1])))
    mean, se = np.mean(counts) / 2, np.std(counts, ddof=1) / np.sqrt(len(counts)) / 2
    assert abs(mean - 1 / np.pi) < 3 * se


def test_density_converges_like_one_over_d():
    rho_inf, _ = kac_rice_density(ZeroSet(1), BF1, [0.0], 100_000, seed=2)
    for d in (100, 1000, 10_000):
        rho_d, _ = kac_rice_density(ZeroSet(1), KernelSpec("rescaled-kostlan", d, 1, 1), [0.0],
                                    100_000, seed=2)
        assert abs(rho_d - rho_inf) < 2 / d
    rng = np.random.default_rng(0)
    for u in rng.uniform(-1, 1, (5, 2)):
        kern = KernelSpec("bargmann-fock", None, 2, 2)
        r_inf, _ = kac_rice_density(ZeroSet(2), kern, u, 20_000, seed=3)
        errs = [abs(kac_rice_density(ZeroSet(2), KernelSpec("rescaled-kostlan", d, 2, 2), u,
                                     20_000, seed=3)[0] - r_inf) for d in (100, 1000)]
        assert errs[1] < errs[0] and errs[0] < 10 / 100 * r_inf


def test_independent_seeds_agree():
    kern = KernelSpec("rescaled-kostlan", 20, 2, 2)
    a, sa = kac_rice_density(ZeroSet(2), kern, [0.3, -0.2], 100_000, seed=10)
    b, sb = kac_rice_density(ZeroSet(2), kern, [0.3, -0.2], 100_000, seed=11)
    assert a >= 0 and abs(a - b) < 3 * np.hypot(sa, sb)


def test_unsupported_and_ill_conditioned():
    with pytest.raises(UnsupportedClass):
        kac_rice_density(CriticalPoints, BF1, [0.0])
    with pytest.raises(UnsupportedClass):
        kac_rice_density(ZeroSet(1), KernelSpec("bargmann-fock", None, 2, 1), [0.0, 0.0])
    with pytest.raises(IllConditioned), np.errstate(all="ignore"):
        kac_rice_density(ZeroSet(1), KernelSpec("weighted-Y", None, 1, 1), [40.0])


def test_constant_density_integrates_to_area():
    rng = np.random.default_rng(1)
    g = rng.standard_normal((100_000, 2))
    pts = g / np.linalg.norm(g, axis=1, keepdims=True) * np.sqrt(rng.uniform(size=(100_000, 1)))
    prof = DensityProfile(pts, np.ones(len(pts)), np.zeros(len(pts)), BF1, ZeroSet(2))
    assert integrate_expected_count(prof).value == pytest.approx(np.pi, abs=1e-3)


def test_sphere_integral_m1_d25():
    e = expected_count_sphere(ZeroSet(1), 25, 1, 100_000, seed=4)
    assert abs(e.value - 10.0) < 0.1
    counts = [find_zeros_circle(sample_kostlan(KostlanSpec(1, 1, 25, seed=s))).count
              for s in range(400)]
    se = np.std(counts, ddof=1) / np.sqrt(len(counts))
    assert abs(np.mean(counts) - e.value) < 3 * np.hypot(se, e.stderr)


@pytest.mark.slow
def test_estimator_agreement_m2_d9():
    e = expected_count_sphere(ZeroSet(2), 9, 2, 100_000, seed=5)
    counts = [find_singular_points(sample_kostlan(KostlanSpec(2, 2, 9, seed=s)), ZeroSet(2)).count
              for s in range(200)]
    se = np.std(counts, ddof=1) / np.sqrt(len(counts))
    assert abs(e.value - 18) < 3 * e.stderr
    assert abs(np.mean(counts) - e.value) < 3 * np.hypot(se, e.stderr)


def test_disk_count_matches_density_times_area():
    e = expected_count_disk(ZeroSet(1), BF1, radius=1.0, quadrature=32, mc_samples=20_000)
    assert abs(e.value - 2 / np.pi) < 3 * e.stderr + 1e-3


def test_sqrt_law_constant_m1():
    c = sqrt_law_constant(ZeroSet(1), 1, 400, seed=6)
    assert c.value > 0 and abs(c.value - 2.0) < 4 * c.stderr
    with pytest.raises(ValueError):
        sqrt_law_constant(ZeroSet(1), 1, 0)


def test_profile_dump(tmp_path):
    prof = density_profile(ZeroSet(1), BF1, [[0.0], [0.5]], mc_samples=1000)
    assert np.all(prof.values >= 0) and np.all(np.isfinite(prof.values))
    dump_profile(prof, tmp_path / "p.txt")
    rows = np.loadtxt(tmp_path / "p.txt")
    assert rows.shape == (2, 3)
    assert format_profile(prof).count("\n") == 2
