import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robust_spca.adversary import (
    CtFool,
    MomentMatching,
    auto_order,
    build_moment_distribution,
    ct_adversary,
    double_factorial_odd,
    dt_adversary,
    moment_adversary,
    moment_targets,
    support_bound,
    whitening_adversary,
    whitening_gamma,
)
from robust_spca.errors import DegenerateInputError, InfeasibleMomentsError, InputError, RegimeError
from robust_spca.model import sample_flat_sparse_vector


def test_whitening_gamma_root():
    g = whitening_gamma(10.0, 1.0, 400)
    assert g == pytest.approx((1 - math.sqrt(0.75)) / 10, abs=1e-15)
    assert abs(g**2 * 100 - 2 * g * 10 + 100 / 400) <= 1e-12
    assert whitening_gamma(3.0, 0.0, 10) == 0.0
    with pytest.raises(RegimeError):
        whitening_gamma(10.0, 5.0, 400)


def test_whitening_adversary_structure(rng):
    n, d, beta = 40, 400, 2.0
    W = rng.standard_normal((n, d))
    u0 = rng.standard_normal(n)
    E = whitening_adversary(W, u0, beta)
    P = np.eye(n) - np.outer(u0, u0) / (u0 @ u0)
    assert np.linalg.norm(P @ E) <= 1e-9
    nrm = np.linalg.norm(u0)
    g = whitening_gamma(nrm, beta, d)
    assert abs(beta * nrm**2 + g**2 * nrm**2 * d - 2 * g * nrm * d) <= 1e-6 * d
    assert not np.any(whitening_adversary(W, u0, 0.0))


def test_whitening_flattens_planted_direction(rng):
    # along u0/|u0| the signal-plus-noise norm drops to the chi-square level
    n, d, k, beta = 50, 5000, 25, 8.0
    v0 = sample_flat_sparse_vector(d, k, 1)
    u0 = rng.standard_normal(n)
    W = rng.standard_normal((n, d))
    E = whitening_adversary(W, u0, beta)
    Y = math.sqrt(beta) * np.outer(u0, v0) + W + E
    uh = u0 / np.linalg.norm(u0)
    assert np.linalg.norm(uh @ Y) ** 2 == pytest.approx(d, rel=0.1)


def test_dt_adversary(rng):
    W = rng.standard_normal((20, 30))
    v0 = sample_flat_sparse_vector(30, 4, 0)
    E = dt_adversary(W, v0, 2.5)
    off = v0 == 0
    assert not np.any(E[:, ~off])
    assert np.allclose(np.linalg.norm(E[:, off], axis=0), 2.5, atol=1e-12)
    assert np.allclose(np.linalg.norm((W + E)[:, off], axis=0), np.linalg.norm(W[:, off], axis=0) + 2.5)
    assert not np.any(dt_adversary(W, v0, 0.0))
    W[:, np.flatnonzero(off)[0]] = 0
    with pytest.raises(DegenerateInputError):
        dt_adversary(W, v0, 1.0)


def test_ct_adversary(rng):
    n, d, r, b = 30, 60, 4, 1.7
    W = rng.standard_normal((n, d))
    v0 = sample_flat_sparse_vector(d, 5, 0)
    u0 = rng.standard_normal(n)
    E = ct_adversary(W, v0, b, r, 11, u0=u0)
    assert not np.any(E[:, v0 != 0])
    cols = np.linalg.norm(E, axis=0)
    assert np.allclose(cols[v0 == 0], b, atol=1e-12)
    # columns of a block share one direction x_i; recover the directions
    X = []
    for j in np.flatnonzero(v0 == 0):
        x = E[:, j] / b
        if not any(abs(abs(x @ y) - 1) < 1e-9 for y in X):
            X.append(x)
    X = np.array(X)
    assert X.shape[0] == r
    G = X @ X.T
    assert np.allclose(G, np.eye(r), atol=1e-12)
    assert np.allclose(X @ u0, 0, atol=1e-10)
    # sign pattern agrees with <w_l, x_i>
    for j in np.flatnonzero(v0 == 0):
        x = E[:, j]
        assert x @ W[:, j] >= 0
    assert not np.any(ct_adversary(W, v0, 0.0, 1, 0))
    with pytest.raises(InputError):
        ct_adversary(W, v0, 1.0, n, 0)
    with pytest.raises(InputError):
        CtFool(1.0, 0)


def test_double_factorial_and_targets():
    assert [double_factorial_odd(r) for r in (0, 2, 4, 6, 8)] == [1, 1, 3, 15, 105]
    with pytest.raises(InputError):
        double_factorial_odd(3)
    with pytest.raises(InputError):
        double_factorial_odd(22)
    t = moment_targets(3.0, 0.01, 4)
    assert t[2] == pytest.approx(0.91 / 0.99, abs=1e-15)
    assert t[4] == pytest.approx((3 - 0.81) / 0.99, abs=1e-15)


@given(st.floats(0, 5), st.floats(1e-6, 0.5), st.sampled_from([2, 4, 6]))
def test_gaussian_mixture_identity(lam, delta, s):
    t = moment_targets(lam, delta, s)
    for r in range(0, s + 1, 2):
        assert (1 - delta) * t[r] + delta * lam**r == pytest.approx(double_factorial_odd(r), rel=1e-12)


def test_auto_order_examples():
    assert auto_order(2.0, 2.0**-25) == 2
    assert auto_order(2.0, 2.0**-45) == 4
    assert build_moment_distribution(2.0, 2.0**-45).s == 4


def test_moment_distribution_example():
    dist = build_moment_distribution(3.0, 0.01, 4)
    assert dist.residual <= 1e-8
    assert dist.moment(2) == pytest.approx(0.9191919191919, abs=1e-9)
    assert dist.moment(4) == pytest.approx(2.2121212121212, abs=1e-9)
    assert dist.moment(1) == 0.0 and dist.moment(3) == 0.0
    locs = [x for x, _ in dist.atoms]
    weights = [w for _, w in dist.atoms]
    assert min(weights) >= 0 and math.fsum(weights) == pytest.approx(1, abs=1e-10)
    assert sorted(locs) == sorted(-x for x in locs)
    assert max(abs(x) for x in locs) <= support_bound(4)


def test_point_mass_and_infeasible():
    d0 = build_moment_distribution(5.0, 0.1, 0)
    assert d0.atoms == [(0.0, 1.0)]
    # lambda=6, s=4 pushes M4 below zero: no measure exists
    with pytest.raises(InfeasibleMomentsError, match="Hankel"):
        build_moment_distribution(6.0, 0.01, 4)
    with pytest.raises(InputError):
        build_moment_distribution(1.0, 0.01, 3)
    with pytest.raises(InputError):
        MomentMatching(1.0, 1.0)


def test_moment_adversary(rng):
    n, d = 8, 200
    W = rng.standard_normal((n, d))
    u = np.where(rng.random(n) < 0.5, -1.0, 1.0) / math.sqrt(n)
    vt = np.zeros(d)
    vt[:5] = 1
    E = moment_adversary(W, u, vt, build_moment_distribution(2.0, 0.025, 0), 0)
    assert np.allclose(E, -np.outer(u, u @ W), atol=1e-14)
    lam = 2.0
    dist = build_moment_distribution(lam, 0.025, 2)
    E = moment_adversary(W, u, vt, dist, 1)
    Y = lam * np.outer(u, vt) + W + E
    vp = u @ Y - lam * vt
    assert not np.any(np.abs(vp[:5]) > 1e-12)
    with pytest.raises(InputError):
        moment_adversary(W, 2 * u, vt, dist, 0)


def test_moment_sampling_second_moment():
    dist = build_moment_distribution(2.0, 0.025, 2)
    x = dist.sample(200_000, 3)
    var4 = dist.moment(4) - dist.moment(2) ** 2
    assert abs(np.mean(x**2) - dist.moment(2)) <= 3 * math.sqrt(var4 / x.size)
