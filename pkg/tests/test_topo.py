import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kostlab.errors import DegenerateDirection
from kostlab.polycore import KostlanSpec, PolynomialMap, sample_kostlan
from kostlab.singulab import ZeroSet, extract_zero_curve, flood_fill_b0
from kostlab.singulab import charts as ch
from kostlab.singulab.results import CurveResult
from kostlab.topo import (Histogram, PerturbationSpec, _perturbation, betti_histogram,
                          betti_of, critical_counts, dump_histogram, format_histogram,
                          morse_audit, morse_audit_retry, semicontinuity_trial, tv_distance)


def circle(c, r, n=64):
    t = 2 * np.pi * np.arange(n + 1) / n
    p = np.column_stack([c[0] + r * np.cos(t), c[1] + r * np.sin(t)])
    p[-1] = p[0]
    return p


def disk_curve(polys, closed, radius=1.0):
    return CurveResult(polys, np.array(closed), [np.zeros(len(p), int) for p in polys], 0.05,
                       "disk", reference_radius=radius)


def test_two_circles():
    b = betti_of(disk_curve([circle((0.3, 0), 0.1), circle((-0.3, 0), 0.1)], [True, True]))
    assert (b.b0, b.b1, b.interior_b0, b.clipped_b0) == (2, 2, 2, 2)


def test_open_arc_through_disk():
    arc = np.column_stack([np.linspace(-1.2, 1.2, 50), np.zeros(50)])
    b = betti_of(disk_curve([arc], [False]))
    assert (b.b0, b.b1, b.interior_b0, b.clipped_b0) == (1, 0, 0, 1)


def test_circle_leaving_the_disk_is_clipped():
    b = betti_of(disk_curve([circle((0.9, 0), 0.3), circle((0, 0), 0.2)], [True, True]))
    assert b.interior_b0 == 1 and b.clipped_b0 == 2
    assert b.b1 <= b.b0 and b.interior_b0 <= b.clipped_b0


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.randoms(use_true_random=False))
def test_betti_invariant_under_fragment_permutation(pieces, rnd):
    polys = [circle((0.4, 0), 0.2), circle((-0.4, 0), 0.2)]
    frags = []
    for p in polys:
        cuts = sorted(rnd.sample(range(1, len(p) - 1), pieces - 1))
        bounds = [0, *cuts, len(p) - 1]
        frags += [p[a:b + 1] for a, b in zip(bounds, bounds[1:])]
    rnd.shuffle(frags)
    frags = [f[::-1] if rnd.random() < 0.5 else f for f in frags]
    b = betti_of(disk_curve(frags, [False] * len(frags)))
    assert (b.b0, b.b1) == (2, 2)


@pytest.mark.parametrize("seed", [0, 1])
def test_sphere_b0_matches_flood_fill(seed):
    P = sample_kostlan(KostlanSpec(2, 1, 30, seed=seed))
    assert betti_of(extract_zero_curve(P)).b0 == flood_fill_b0(P)


def test_morse_audit_equator():
    c = extract_zero_curve(PolynomialMap.from_terms(2, 1, {(1, 0, 0): 1.0}))
    crit, ok = morse_audit(c, [0.0, 1.0, 0.0])
    assert crit == 2 and ok


def test_morse_audit_latitudes():
    t2 = 0.25
    P = PolynomialMap.from_terms(2, 2, {(2, 0, 0): 1 - t2, (0, 2, 0): -t2, (0, 0, 2): -t2})
    c = extract_zero_curve(P, h=0.05)
    # exact latitude circles: the axis height is constant along each polyline
    flat = CurveResult([np.column_stack([np.full(len(p), np.sign(p[0, 0]) * 0.5), p[:, 1:]])
                        for p in c.polylines], c.closed, c.charts, c.h, "sphere")
    with pytest.raises(DegenerateDirection):
        critical_counts(flat, [1.0, 0.0, 0.0])
    crit, ok = morse_audit_retry(c, np.random.default_rng(0))
    assert crit == 4 and ok


def test_morse_audit_random_curves():
    rng = np.random.default_rng(3)
    for seed in range(3):
        c = extract_zero_curve(sample_kostlan(KostlanSpec(2, 1, 20, seed=seed)))
        fine = extract_zero_curve(sample_kostlan(KostlanSpec(2, 1, 20, seed=seed)), h=c.h / 2)
        for _ in range(20):
            crit, ok = morse_audit_retry(c, rng)
            assert ok and crit >= 2 * c.b0
            assert morse_audit_retry(fine, rng)[1]


def test_semicontinuity_circle_trig_bump():
    f = PolynomialMap.from_terms(1, 1, {(0, 1): 1.0})
    spec = PerturbationSpec(0.1, 40.0, "trigonometric-bump", seed=1)
    r = semicontinuity_trial(f, spec)
    assert r.b0_base == 2 and r.both_transversal
    # dense sign-scan oracle of f + p
    theta = 2 * np.pi * (np.arange(100_000) + 0.5) / 100_000
    p = _perturbation(spec, "circle", 0.1, 1)
    v = np.sin(theta) + p.values(theta)
    assert r.b0_pert == np.count_nonzero(np.sign(v) != np.sign(np.roll(v, 1)))
    assert r.b0_pert >= 2


def test_zero_amplitude_is_identity():
    f = sample_kostlan(KostlanSpec(1, 1, 10, seed=4))
    r = semicontinuity_trial(f, PerturbationSpec(0.0))
    assert r.b0_pert == r.b0_base


@pytest.mark.parametrize("mode,omega", [("trigonometric-bump", 40.0),
                                        ("random-high-degree", 60)])
def test_perturbation_sup_bound_circle(mode, omega):
    theta = np.linspace(0, 2 * np.pi, 200_001)
    p = _perturbation(PerturbationSpec(0.2, omega, mode, seed=3), "circle", 0.2, 10)
    assert np.abs(p.values(theta)).max() <= 0.2


@pytest.mark.parametrize("mode,omega", [("trigonometric-bump", 40.0),
                                        ("random-high-degree", 30)])
def test_perturbation_sup_bound_sphere(mode, omega):
    p = _perturbation(PerturbationSpec(0.2, omega, mode, seed=3), "sphere", 0.2, 10)
    t = np.linspace(-1, 1, 401)
    assert max(np.abs(p.grid(f.index, t, t)).max() for f in ch.FACES) <= 0.2


def test_semicontinuity_random_trials():
    for s in range(30):
        f = sample_kostlan(KostlanSpec(1, 1, 10, seed=s))
        r = semicontinuity_trial(f, PerturbationSpec(None, 60, "random-high-degree", seed=s))
        if r.both_transversal:
            assert r.b0_pert >= r.b0_base


def test_semicontinuity_sphere():
    f = sample_kostlan(KostlanSpec(2, 1, 6, seed=2))
    r = semicontinuity_trial(f, PerturbationSpec(None, 36, "random-high-degree", seed=2))
    assert r.amplitude > 0
    if r.both_transversal:
        assert r.b0_pert >= r.b0_base


# ---------------------------------------------------------------- histograms

def test_constant_sampler_is_a_point_mass(tmp_path):
    from kostlab.fields import BargmannFockField
    field = BargmannFockField(2, 1, 0, [1.0])
    h = betti_histogram(lambda d, s: field, ZeroSet(1), 4, 200)
    assert h.counts == {0: 200} and tv_distance(h, h) == 0.0
    dump_histogram(h, tmp_path / "h.txt")
    assert (tmp_path / "h.txt").read_text() == format_histogram(h) == "0 1\n"
    with pytest.raises(ValueError):
        betti_histogram(lambda d, s: field, ZeroSet(1), 4, 50)


def test_disjoint_supports():
    assert tv_distance({0: 3}, {1: 5}) == 1.0
    assert tv_distance(Histogram.from_values([0, 0, 1]), Histogram.from_values([0, 1, 1])) == \
        pytest.approx(1 / 3)


hist = st.dictionaries(st.integers(0, 6), st.integers(1, 50), min_size=1)


@given(hist, hist, hist)
def test_tv_is_a_metric(a, b, c):
    assert tv_distance(a, a) == 0
    assert 0 <= tv_distance(a, b) <= 1 + 1e-12
    assert tv_distance(a, b) == pytest.approx(tv_distance(b, a))
    assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-12
