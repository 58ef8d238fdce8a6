from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kostlab.errors import NonUnitInput, UnsupportedOrder
from kostlab.polycore import (KostlanSpec, PolynomialMap, ambient_derivatives, dump_map,
                              empirical_covariance, enumerate_multi_indices, evaluate_map,
                              index_of, kostlan_std, load_map, multinomial, sample_kostlan,
                              sample_kostlan_batch, spherical_jet, tangent_frame)

from conftest import unit


def naive_eval(P, x):
    out = np.zeros(P.k)
    for j in range(P.k):
        for alpha, c in zip(P.exponents, P.coefficients[j]):
            term = c
            for xi, a in zip(x, alpha):
                term *= xi ** int(a)
            out[j] += term
    return out


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("d", [0, 1, 4, 10])
def test_enumeration_is_a_bijection(m, d):
    E = enumerate_multi_indices(m, d)
    assert E.shape == (comb(m + d, m), m + 1)
    assert np.all(E.sum(axis=1) == d)
    assert [index_of(a) for a in E] == list(range(len(E)))
    # graded-lex: strictly decreasing as tuples
    assert all(tuple(a) > tuple(b) for a, b in zip(E, E[1:]))


@given(st.lists(st.integers(0, 6), min_size=2, max_size=4))
def test_index_of_roundtrip(alpha):
    E = enumerate_multi_indices(len(alpha) - 1, sum(alpha))
    assert tuple(E[index_of(alpha)]) == tuple(alpha)


def test_multinomial_values():
    assert multinomial([5, 0, 0]) == pytest.approx(1.0)
    assert multinomial([1, 1]) == pytest.approx(2.0)
    assert multinomial([2, 1, 1]) == pytest.approx(factorial(4) / (2 * 1 * 1))


def test_kostlan_std_matches_factorials():
    E = enumerate_multi_indices(2, 6)
    ref = [np.sqrt(factorial(6) / np.prod([factorial(int(a)) for a in al])) for al in E]
    assert np.allclose(kostlan_std(2, 6), ref, rtol=1e-13)


def test_spec_validation():
    with pytest.raises(ValueError):
        KostlanSpec(m=0, k=1, d=3)
    with pytest.raises(ValueError):
        KostlanSpec(m=1, k=1, d=0)
    with pytest.raises(ValueError):
        PolynomialMap(1, 1, 2, np.zeros((1, 4)))


def test_sampling_is_deterministic():
    a = sample_kostlan(KostlanSpec(2, 2, 7, seed=99))
    b = sample_kostlan(KostlanSpec(2, 2, 7, seed=99))
    c = sample_kostlan(KostlanSpec(2, 2, 7, seed=100))
    assert np.array_equal(a.coefficients, b.coefficients)
    assert not np.array_equal(a.coefficients, c.coefficients)
    assert np.all(np.isfinite(a.coefficients))


def test_coefficient_variance_matches_multinomial():
    spec = KostlanSpec(2, 1, 4, seed=3)
    n = 20_000
    c = sample_kostlan_batch(spec, n)[:, 0, :]
    var = c.var(axis=0, ddof=1)
    target = multinomial(enumerate_multi_indices(2, 4))
    se = target * np.sqrt(2.0 / (n - 1))
    assert np.all(np.abs(var - target) < 5 * se)


def test_evaluate_trivial_monomials():
    P = PolynomialMap.from_terms(2, 5, {(5, 0, 0): 1.0})
    assert evaluate_map(P, [1.0, 0, 0])[0] == 1.0
    assert evaluate_map(P, [-1.0, 0, 0])[0] == -1.0


def test_evaluate_matches_naive(rng):
    P = sample_kostlan(KostlanSpec(2, 2, 9, seed=1))
    for x in unit(rng, 5, 3):
        ref = naive_eval(P, x)
        assert np.allclose(evaluate_map(P, x), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_non_unit_input_rejected():
    P = sample_kostlan(KostlanSpec(1, 1, 3))
    with pytest.raises(NonUnitInput):
        evaluate_map(P, [1.0, 1.0])


def test_euler_identity(rng):
    for seed in range(4):
        P = sample_kostlan(KostlanSpec(2, 2, 8, seed=seed))
        X = unit(rng, 100, 3)
        val, grad, _ = ambient_derivatives(P, X, order=1)
        radial = np.einsum("pkv,pv->pk", grad, X)
        scale = np.abs(P.d * val).max()
        assert np.allclose(radial, P.d * val, rtol=1e-9, atol=1e-9 * scale)


def test_tangent_frame_orthonormal(rng):
    for x in unit(rng, 20, 4):
        E = tangent_frame(x)
        assert np.allclose(E @ E.T, np.eye(3), atol=1e-12)
        assert np.allclose(E @ x, 0, atol=1e-12)


def test_height_function_pole_is_nondegenerate_maximum():
    P = PolynomialMap.from_terms(2, 1, {(1, 0, 0): 1.0})
    J = spherical_jet(P, [1.0, 0, 0])
    assert J.value[0] == pytest.approx(1.0)
    assert np.allclose(J.gradient, 0, atol=1e-14)
    assert np.allclose(J.hessian[0], -np.eye(2), atol=1e-12)


def _geodesic(P, x, e, t):
    # (len(t), k) values of P along the great circle through x in direction e
    t = np.atleast_1d(t)[:, None]
    return evaluate_map(P, np.cos(t) * x + np.sin(t) * e)


def test_jet_matches_finite_differences(rng):
    P = sample_kostlan(KostlanSpec(2, 2, 6, seed=5))
    for x in unit(rng, 3, 3):
        J = spherical_jet(P, x)
        for i, e in enumerate(J.frame):
            t = 1e-5
            fd = (_geodesic(P, x, e, t)[0] - _geodesic(P, x, e, -t)[0]) / (2 * t)
            assert np.allclose(J.gradient[:, i], fd, atol=1e-6)
            t = 1e-4
            f = _geodesic(P, x, e, [t, 0.0, -t])
            fd2 = (f[0] - 2 * f[1] + f[2]) / t ** 2
            assert np.allclose(J.hessian[:, i, i], fd2, atol=1e-4 * max(1, np.abs(fd2).max()))
        assert np.array_equal(J.hessian, np.swapaxes(J.hessian, -1, -2))


def test_jet_order_checked():
    P = sample_kostlan(KostlanSpec(1, 1, 3))
    with pytest.raises(UnsupportedOrder):
        spherical_jet(P, [1.0, 0.0], r=3)


def test_covariance_kernel():
    spec = KostlanSpec(2, 2, 4, seed=11)
    x = np.array([1.0, 0, 0])
    C, se = empirical_covariance(spec, x, x, 4000)
    assert np.all(np.abs(np.diag(C) - 1) < 5 * np.diag(se))
    y = np.array([0, 1.0, 0])
    C, se = empirical_covariance(spec, x, y, 4000)
    assert np.all(np.abs(C) < 5 * se + 1e-12)
    y = np.array([0.5, np.sqrt(0.75), 0])
    C, se = empirical_covariance(spec, x, y, 20_000)
    assert np.all(np.abs(np.diag(C) - 0.0625) < 5 * np.diag(se))


def test_orthogonal_invariance_of_mean_abs_value(rng):
    from scipy.stats import special_ortho_group
    spec = KostlanSpec(2, 1, 5, seed=21)
    R = special_ortho_group.rvs(3, random_state=1)
    x = np.array([0.0, 0.6, 0.8])
    c = sample_kostlan_batch(spec, 3000)[:, 0, :]
    from kostlab.polycore import monomials
    E = enumerate_multi_indices(2, 5)
    a = np.abs(c @ monomials(x[None], E)[0])
    b = np.abs(c @ monomials((R @ x)[None], E)[0])
    se = np.hypot(a.std(), b.std()) / np.sqrt(len(a))
    assert abs(a.mean() - b.mean()) < 3 * se


def test_dump_roundtrip(tmp_path):
    P = sample_kostlan(KostlanSpec(2, 2, 5, seed=8))
    dump_map(P, tmp_path / "p.txt")
    Q = load_map(tmp_path / "p.txt", 2, 2)
    assert np.array_equal(P.coefficients, Q.coefficients)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 12))
def test_evaluation_parity_under_negation(seed, d):
    P = sample_kostlan(KostlanSpec(1, 1, d, seed=seed))
    x = np.array([0.6, 0.8])
    assert evaluate_map(P, -x)[0] == pytest.approx((-1) ** d * evaluate_map(P, x)[0],
                                                     rel=1e-12, abs=1e-12)
