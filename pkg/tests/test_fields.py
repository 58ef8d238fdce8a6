from math import factorial

import numpy as np
import pytest

from kostlab.errors import OutOfDomain
from kostlab.fields import (AffinePoly, BargmannFockField, KernelSpec, RescaledField,
                            affine_exponents, coupled_weights, eval_coupled,
                            kernel_jet_covariance, rescaled_jet, sample_coupled,
                            truncation_order, weighted_field_Y)
from kostlab.polycore import KostlanSpec, PolynomialMap, evaluate_map, sample_kostlan


def brute_truncation(rho, eps, m, top=200):
    x = m * rho * rho
    terms = [1.0]
    for j in range(1, top):
        terms.append(terms[-1] * x / j)
    for D in range(top - 1):
        if sum(terms[D + 1:]) < eps * eps:
            return D


def fd_grad(f, u, h=1e-6):
    g = []
    for i in range(len(u)):
        e = np.zeros(len(u))
        e[i] = h
        g.append((f(u + e) - f(u - e)) / (2 * h))
    return np.stack(g, axis=-1)


def test_truncation_order_examples():
    # frozen from the direct tail sum: sum_{j>11} 1/j! = 2.26e-9 < 1e-8 < 2.73e-8
    assert truncation_order(1.0, 1e-4, 1) == 11 == brute_truncation(1.0, 1e-4, 1)
    assert truncation_order(1.0, 0.999, 1) <= 2
    assert truncation_order(0.5, 0.999, 1) <= 2
    assert truncation_order(1.0, 1e-4, 2) == brute_truncation(1.0, 1e-4, 2)
    with pytest.raises(ValueError):
        truncation_order(0.0, 0.1, 1)


def test_rescaled_constant_and_linear():
    d = 9
    X = RescaledField(PolynomialMap.from_terms(2, d, {(d, 0, 0): 1.0}))
    v, g, _ = rescaled_jet(X, np.zeros(2), 1)
    assert v[0, 0] == 1.0 and np.allclose(g, 0)
    X = RescaledField(PolynomialMap.from_terms(2, d, {(d - 1, 1, 0): 1.0}))
    v, g, _ = rescaled_jet(X, np.zeros(2), 1)
    assert v[0, 0] == 0.0
    assert g[0, 0] == pytest.approx([1 / np.sqrt(d), 0.0])
    fd = fd_grad(lambda u: X(u), np.zeros(2), 1e-5)
    assert np.allclose(g[0, 0], fd, atol=1e-9)


def test_rescaled_matches_substitution(rng):
    P = sample_kostlan(KostlanSpec(2, 2, 11, seed=4))
    X = RescaledField(P)
    for u in rng.uniform(-1, 1, (5, 2)):
        y = np.concatenate([[1.0], u / np.sqrt(P.d)])
        n = np.linalg.norm(y)
        ref = evaluate_map(P, y / n) * n ** P.d
        assert np.allclose(X(u), ref, rtol=1e-9)


def test_rescaled_domain():
    X = RescaledField(sample_kostlan(KostlanSpec(1, 1, 4)))
    with pytest.raises(OutOfDomain):
        X(np.array([3.5]))


def test_rescaled_derivatives_match_fd(rng):
    X = RescaledField(sample_kostlan(KostlanSpec(2, 1, 7, seed=2)))
    u = rng.uniform(-0.8, 0.8, 2)
    _, g, H = X.jet(u, 2)
    assert np.allclose(g[0, 0], fd_grad(lambda p: X(p)[0], u), atol=1e-6)
    Hfd = fd_grad(lambda p: X.jet(p, 1)[1][0, 0], u)
    assert np.allclose(H[0, 0], Hfd, atol=1e-5)


def test_bargmann_fock_coefficient_variance():
    D = 4
    exps = affine_exponents(2, D)
    coeffs = np.array([BargmannFockField.sample(2, 1, s, D)._poly.coeffs[0]
                       for s in range(4000)])
    target = np.array([1 / (factorial(a) * factorial(b)) for a, b in exps])
    se = target * np.sqrt(2 / 3999)
    assert np.all(np.abs(coeffs.var(axis=0, ddof=1) - target) < 5 * se)


def test_coupled_views_share_the_table():
    pair = sample_coupled(2, 1, 20, 7)
    zero = np.zeros((1, 2))
    vals = [eval_coupled(pair, d, zero)[0][0, 0] for d in (1, 5, 64, None)]
    assert all(v == pair.gamma[0, 0] for v in vals)
    exps = pair.exps
    lin = exps.sum(axis=1) == 1
    for d in (1, 3, 100):
        assert np.allclose(coupled_weights(exps, d)[lin], 1.0)


def test_coupled_convergence_median():
    from kostlab.xplab.runner import coupled_sup_distance
    D = truncation_order(1.0, 1e-6, 2)
    dist = {d: [] for d in (8, 32, 128, 512)}
    for s in range(50):
        pair = sample_coupled(2, 1, D, s)
        for d in dist:
            dist[d].append(coupled_sup_distance(pair, d, 2))
    med = [np.median(dist[d]) for d in (8, 32, 128, 512)]
    assert all(b < a for a, b in zip(med, med[1:]))


def test_truncation_soundness():
    eps = 1e-6
    D = truncation_order(1.0, eps, 2)
    t = np.linspace(-1, 1, 21)
    A, B = np.meshgrid(t, t, indexing="ij")
    u = np.column_stack([A.ravel(), B.ravel()])
    u = u[(u ** 2).sum(1) <= 1]
    for s in range(20):
        big = sample_coupled(2, 1, 2 * D, s)
        full = big.view(None)(u)[:, 0]
        exps = big.exps
        keep = exps.sum(axis=1) <= D
        small = AffinePoly(exps[keep], big.gamma[:, keep] * coupled_weights(exps, None)[keep])
        assert np.abs(small.jet(u)[0][:, 0] - full).max() < 10 * eps


def test_tensor_grid_matches_pointwise(rng):
    X = sample_coupled(2, 2, 30, 3).view(50)
    ta, tb = np.linspace(-1, 1, 7), np.linspace(-0.5, 1.5, 5)
    A, B = np.meshgrid(ta, tb, indexing="ij")
    ref = X.jet(np.column_stack([A.ravel(), B.ravel()]))[0].T.reshape(2, 7, 5)
    assert np.allclose(X.grid_values(ta, tb), ref, rtol=1e-12, atol=1e-12)


def test_two_variable_jet_matches_monomial_path(rng):
    exps = affine_exponents(2, 25)
    P = AffinePoly(exps, rng.standard_normal((2, len(exps))) / np.exp(0.4 * exps.sum(1)))
    u = rng.uniform(-1.5, 1.5, (30, 2))
    fast = P.jet(u, 2)
    slow = [P.jet(x[None], 2) for x in u]
    for i in range(3):
        ref = np.concatenate([s[i] for s in slow])
        assert np.allclose(fast[i], ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


@pytest.mark.parametrize("spec", [KernelSpec("bargmann-fock", None, 2),
                                  KernelSpec("rescaled-kostlan", 30, 2)])
def test_kernel_jet_at_origin(spec):
    C = kernel_jet_covariance(spec, np.zeros(2))
    assert np.allclose(C, np.eye(3), atol=1e-12)


def test_kernel_jet_fd_and_limit(rng):
    spec = KernelSpec("rescaled-kostlan", 40, 2)
    u = rng.uniform(-1, 1, 2)
    C = kernel_jet_covariance(spec, u)
    h = 1e-4
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (spec(u, u + e) - spec(u, u - e))[0] / (2 * h)
        assert C[0, 1 + i] == pytest.approx(fd, rel=1e-6)
    for u in rng.uniform(-1, 1, (5, 2)):
        bf = kernel_jet_covariance(KernelSpec("bargmann-fock", None, 2), u)
        for d in (100, 1000, 10_000):
            Cd = kernel_jet_covariance(KernelSpec("rescaled-kostlan", d, 2), u)
            assert np.abs(Cd - bf).max() < 2 / d * np.abs(bf).max() * 5
    for kind, d in (("bargmann-fock", None), ("rescaled-kostlan", 6), ("weighted-Y", 8)):
        C = kernel_jet_covariance(KernelSpec(kind, d, 2, 2), rng.uniform(-1, 1, 2))
        assert np.linalg.eigvalsh(C).min() >= -1e-10
        assert np.array_equal(C, C.T)


def test_kernel_identity_empirical(rng):
    d, n = 6, 20_000
    c = np.array([sample_kostlan(KostlanSpec(1, 1, d, seed=s)).coefficients[0]
                  for s in range(n)])
    spec = KernelSpec("rescaled-kostlan", d, 1)
    exps = np.arange(d + 1)
    scale = d ** (-0.5 * exps)
    for u, v in rng.uniform(-1, 1, (5, 2)):
        xu = c @ (scale * u ** exps)
        xv = c @ (scale * v ** exps)
        prod = xu * xv
        assert abs(prod.mean() - spec(np.array([u]), np.array([v]))[0]) < \
            5 * prod.std() / np.sqrt(n)


def test_weighted_field(rng):
    X = sample_coupled(2, 1, 25, 9).view(None)
    Y = weighted_field_Y(X)
    assert Y(np.zeros(2)) == X(np.zeros(2))
    u = np.array([0.6, 0.8])
    assert Y(u) == pytest.approx(np.exp(-0.5) * X(u))
    u = rng.uniform(-0.7, 0.7, 2)
    assert np.allclose(Y.jet(u, 1)[1][0, 0], fd_grad(lambda p: Y(p)[0], u), atol=1e-6)
