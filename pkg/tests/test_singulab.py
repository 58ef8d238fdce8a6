import math

import numpy as np
import pytest
from scipy.optimize import fsolve
from scipy.spatial import cKDTree

from kostlab.errors import DegenerateSample, UnsupportedClass
from kostlab.kacrice import cartwright_sturmfels_bound
from kostlab.polycore import (KostlanSpec, PolynomialMap, ambient_derivatives, evaluate_map,
                              sample_kostlan)
from kostlab.singulab import (CriticalPoints, CuspPoints, FoldCurve, Minima, ZeroSet,
                              analyze_curve, codimension, dump_result, extract_zero_curve,
                              find_cusps, find_singular_points, find_zeros_circle,
                              flood_fill_b0, format_result, load_components, sample_knot)
from kostlab.singulab.charts import PolyDiskField
from kostlab.singulab.circle import scan_size
from kostlab.singulab.knots import circle_curve, index_gap, min_points, trefoil_curve
from kostlab.singulab.points import seed_spacing


def fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = math.pi * (3 - math.sqrt(5)) * i
    return np.column_stack([z, r * np.cos(phi), r * np.sin(phi)])


def lagrange_critical_points(P, n=120_000):
    """Critical points of P on S^2: seeds at local minima of the tangential gradient
    norm over a dense point cloud, refined on grad P = lambda x, |x| = 1."""
    X = fibonacci_sphere(n)
    _, g, _ = ambient_derivatives(P, X, order=1)
    g = g[:, 0]
    tang = g - np.einsum("ij,ij->i", g, X)[:, None] * X
    norm = np.linalg.norm(tang, axis=1)
    _, nb = cKDTree(X).query(X, k=9)
    seeds = X[norm <= norm[nb].min(axis=1)]

    def system(z):
        x, lam = z[:3], z[3]
        grad = ambient_derivatives(P, x / np.linalg.norm(x), order=1, check_unit=False)[1][0, 0]
        return np.concatenate([grad - lam * x, [x @ x - 1]])

    roots = []
    for s in seeds:
        z, _, ok, _ = fsolve(system, np.concatenate([s, [P.d * evaluate_map(P, s)[0]]]),
                             full_output=True, xtol=1e-13)
        if ok == 1 and np.abs(system(z)).max() < 1e-9:
            x = z[:3] / np.linalg.norm(z[:3])
            if all(np.linalg.norm(x - r) > 1e-6 for r in roots):
                roots.append(x)
    return np.array(roots)


# ---------------------------------------------------------------- catalog

def test_codimensions():
    assert codimension(ZeroSet(1), 2) == 1
    assert codimension(ZeroSet(2), 2) == 2
    assert codimension(CriticalPoints, 2) == 2
    assert codimension(CriticalPoints, 1) == 1
    assert codimension(FoldCurve, 2) == 1
    assert codimension(CuspPoints, 2) == 2
    with pytest.raises(UnsupportedClass):
        FoldCurve.check_dimension(1)


# ---------------------------------------------------------------- circle

def test_linear_zeros_on_circle():
    r = find_zeros_circle(PolynomialMap.from_terms(1, 1, {(1, 0): 1.0}))
    ang = np.sort(np.arctan2(r.points[:, 1], r.points[:, 0]))
    assert np.allclose(ang, [-np.pi / 2, np.pi / 2], atol=1e-11)


@pytest.mark.parametrize("d", [1, 3, 8, 17])
def test_real_part_power_has_2d_equally_spaced_zeros(d):
    terms = {}
    for j in range(0, d + 1, 2):  # Re (x0 + i x1)^d = sum_j C(d,j) x0^{d-j} (i x1)^j
        terms[(d - j, j)] = math.comb(d, j) * (-1) ** (j // 2)
    r = find_zeros_circle(PolynomialMap.from_terms(1, d, terms))
    assert r.count == 2 * d
    ang = np.sort(np.mod(np.arctan2(r.points[:, 1], r.points[:, 0]), 2 * np.pi))
    ref = np.sort(np.mod((np.arange(2 * d) + 0.5) * np.pi / d, 2 * np.pi))
    assert np.allclose(ang, ref, atol=1e-10)


def test_scan_size():
    assert scan_size(100) == 1024 + 64 * 10


def test_mean_zero_count_circle_d100():
    counts = [find_zeros_circle(sample_kostlan(KostlanSpec(1, 1, 100, seed=s))).count
              for s in range(300)]
    se = np.std(counts, ddof=1) / np.sqrt(len(counts))
    assert abs(np.mean(counts) - 20.0) < 4 * se


def test_tangent_zero_is_flagged():
    # x0^2 has double zeros at +-pi/2: no sign change, so either flagged or none reported
    P = PolynomialMap.from_terms(1, 2, {(2, 0): 1.0})
    try:
        r = find_zeros_circle(P)
    except DegenerateSample:
        return
    assert r.count == 0


# ---------------------------------------------------------------- sphere points

def test_height_function_critical_points():
    P = PolynomialMap.from_terms(2, 1, {(1, 0, 0): 1.0})
    r = find_singular_points(P, CriticalPoints)
    assert r.count == 2
    assert np.allclose(np.sort(r.points[:, 0]), [-1, 1], atol=1e-12)
    m = find_singular_points(P, Minima)
    assert m.count == 1 and np.allclose(m.points[0], [-1, 0, 0], atol=1e-12)


def test_planar_linear_zero_set():
    P = PolynomialMap.from_terms(2, 1, {(0, 1, 0): [1.0, 0.0], (0, 0, 1): [0.0, 1.0]}, k=2)
    r = find_singular_points(P, ZeroSet(2))
    assert r.count == 2
    assert np.allclose(np.abs(r.points[:, 0]), 1, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_critical_points_match_lagrange_oracle(seed):
    P = sample_kostlan(KostlanSpec(2, 1, 5, seed=seed))
    r = find_singular_points(P, CriticalPoints)
    ref = lagrange_critical_points(P)
    assert r.count == len(ref)
    dist = np.linalg.norm(r.points[:, None] - ref[None], axis=2).min(axis=1)
    assert dist.max() < 1e-8


def test_point_result_invariants():
    P = sample_kostlan(KostlanSpec(2, 1, 12, seed=4))
    r = find_singular_points(P, CriticalPoints)
    assert np.all(r.residuals < 1e-10)
    G = np.clip(r.points @ r.points.T, -1, 1)
    ang = np.arccos(G[np.triu_indices(r.count, 1)])
    assert ang.min() > r.dedup_radius
    assert r.count <= cartwright_sturmfels_bound(2, 12)
    assert r.count <= 1e3 * 12 ** 2


def test_minima_subset_of_critical_points():
    P = sample_kostlan(KostlanSpec(2, 1, 9, seed=6))
    c = find_singular_points(P, CriticalPoints)
    m = find_singular_points(P, Minima)
    assert 0 < m.count < c.count
    d = np.linalg.norm(m.points[:, None] - c.points[None], axis=2).min(axis=1)
    assert d.max() < c.h / 4


def test_antipodal_symmetry_odd_degree():
    P = sample_kostlan(KostlanSpec(2, 1, 7, seed=8))
    r = find_singular_points(P, CriticalPoints)
    d = np.linalg.norm(r.points[:, None] + r.points[None], axis=2).min(axis=1)
    assert d.max() < 1e-8


def test_seed_spacing():
    assert seed_spacing(1) == 0.08
    assert seed_spacing(400) == pytest.approx(1 / 160)


# ---------------------------------------------------------------- curves

def test_equator_is_one_circle():
    P = PolynomialMap.from_terms(2, 1, {(1, 0, 0): 1.0})
    c = extract_zero_curve(P)
    assert c.b0 == 1 and c.b1 == 1
    pts = c.polylines[0]
    assert np.allclose(pts[0], pts[-1])
    assert np.abs(pts[:, 0]).max() < 1e-9


def test_two_latitude_circles():
    t2 = 0.25  # x0^2 - t^2 |x|^2
    P = PolynomialMap.from_terms(2, 2, {(2, 0, 0): 1 - t2, (0, 2, 0): -t2, (0, 0, 2): -t2})
    c = extract_zero_curve(P)
    assert c.b0 == 2 and c.b1 == 2


def test_curve_vertices_are_close():
    P = sample_kostlan(KostlanSpec(2, 1, 20, seed=3))
    c = extract_zero_curve(P)
    for poly, closed in zip(c.polylines, c.closed):
        step = np.linalg.norm(np.diff(poly, axis=0), axis=1)
        assert step.max() < 2 * c.h * 1.5
        if closed:
            assert np.array_equal(poly[0], poly[-1])


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_components_match_flood_fill(seed):
    P = sample_kostlan(KostlanSpec(2, 1, 20, seed=seed))
    assert extract_zero_curve(P).b0 == flood_fill_b0(P)


def test_components_stable_under_refinement():
    P = sample_kostlan(KostlanSpec(2, 1, 16, seed=11))
    c = extract_zero_curve(P)
    assert extract_zero_curve(P, h=c.h / 2).b0 == c.b0


def test_dump_roundtrip(tmp_path):
    P = sample_kostlan(KostlanSpec(2, 1, 6, seed=2))
    c = extract_zero_curve(P)
    dump_result(c, tmp_path / "c.txt")
    comps = load_components(tmp_path / "c.txt")
    assert len(comps) == c.b0
    assert format_result(c).count("\n\n") == c.b0 - 1


# ---------------------------------------------------------------- folds and cusps

def whitney():
    return PolyDiskField.from_terms([{(3, 0): 1.0, (1, 1): -1.0}, {(0, 1): 1.0}])


def test_whitney_cusp():
    r = find_cusps(whitney())
    assert r.count == 1
    assert np.allclose(r.points[0], [0, 0], atol=1e-8)


def test_whitney_fold_is_parabola():
    c = extract_zero_curve(whitney(), FoldCurve)
    pts = np.vstack(c.polylines)
    # det = 3u^2 - v
    assert np.abs(3 * pts[:, 0] ** 2 - pts[:, 1]).max() < 1e-8


def test_linear_map_has_no_cusps():
    r = find_cusps(PolyDiskField.from_terms([{(1, 0): 2.0, (0, 1): 1.0}, {(0, 1): 1.0}]))
    assert r.count == 0


@pytest.mark.parametrize("seed", [0, 1])
def test_cusps_stable_under_refinement(seed):
    P = sample_kostlan(KostlanSpec(2, 2, 8, seed=seed))
    a = find_cusps(P)
    b = find_cusps(P, h=a.h / 2)
    assert a.count == b.count
    if a.count:
        d = np.linalg.norm(a.points[:, None] - b.points[None], axis=2).min(axis=1)
        assert d.max() < 2 * a.h


# ---------------------------------------------------------------- knots

def brute_crossings(xy):
    n = len(xy)
    count = 0
    for i in range(n):
        p, q = xy[i], xy[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            r, s = xy[j], xy[(j + 1) % n]
            A = np.array([q - p, r - s]).T
            if abs(np.linalg.det(A)) < 1e-15:
                continue
            t = np.linalg.solve(A, r - p)
            count += bool(0 < t[0] < 1 and 0 < t[1] < 1)
    return count


def test_circle_and_trefoil():
    r = analyze_curve(circle_curve(), 8)
    assert r.crossings == 0 and r.embedded
    tre = trefoil_curve(256)
    r = analyze_curve(tre, 8)
    assert r.crossings == 3 == brute_crossings(tre[:, :2])


def test_knot_sampling():
    d = 12
    assert min_points(d) == 64 * 4
    with pytest.raises(ValueError):
        sample_knot(d, 100)
    r = sample_knot(d, seed=5)
    assert r.points.shape == (min_points(d), 3) and r.embedded
    assert r.crossings == brute_crossings((r.points @ r.rotation.T)[:, :2])
    assert index_gap(360, math.radians(10.5)) == 11
