import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robust_spca.core import corr2
from robust_spca.errors import CapacityError, InputError
from robust_spca.model import sample_flat_sparse_vector
from robust_spca.polyest import (
    ColorCodingParams,
    brute_force_P,
    choose_poly_params,
    color_coded_P,
    colorful_sums,
    kappa,
    log_colorful_rescale,
    path_graph_count,
    path_graph_sum,
    poly_estimator,
)


def test_choose_params_examples():
    assert choose_poly_params(math.e**3, math.e**9, math.e**4.5) == (5, 2)
    b, l = choose_poly_params(50, 1000, 3, c_star=1e-9)
    assert (b, l) == (1, math.ceil(math.log(1000)))
    with pytest.raises(InputError):
        choose_poly_params(1, 10, 2)


@given(st.integers(2, 10**4), st.integers(2, 10**5), st.integers(1, 300), st.floats(0, 3))
def test_choose_params_parity_and_cover(n, d, k, c):
    b, l = choose_poly_params(n, d, k, c)
    assert b % 2 == 1 and b * l >= math.log(d) - 1e-9 and l >= 1


def test_kappa_examples():
    assert math.exp(kappa(2, 3, 1.5, 1, 2)) == pytest.approx(4.5)
    assert math.exp(kappa(2, 1, 1.0, 1, 1)) == pytest.approx(2)
    with pytest.raises(InputError):
        kappa(2, 1, 0.0, 1, 1)
    with pytest.raises(InputError):
        kappa(1, 3, 1.0, 1, 2)
    # exact interior count for l=2 is k-2
    assert kappa(4, 5, 2.0, 1, 2, "exact") - kappa(4, 5, 2.0, 1, 2) == pytest.approx(math.log(3 / 5))


def test_brute_force_examples():
    assert brute_force_P(np.ones((2, 2)), 0, 1, 1, 1, kappa(2, 1, 1.0, 1, 1)) == pytest.approx(1)
    assert brute_force_P(np.zeros((3, 4)), 0, 3, 1, 2, 0.0) == 0
    Y = np.random.default_rng(0).standard_normal((4, 5))
    # direct formula for b=1, l=2: sum over interior j and ordered distinct rows
    manual = 0.0
    for j in (1, 2, 3):
        for i, ii in itertools.permutations(range(4), 2):
            manual += Y[i, 0] * Y[i, j] * Y[ii, j] * Y[ii, 4]
    assert path_graph_sum(Y, 0, 4, 1, 2) == pytest.approx(manual, rel=1e-12)
    assert path_graph_count(4, 5, 1, 2) == 3 * 12


def test_brute_force_guard():
    with pytest.raises(CapacityError):
        path_graph_sum(np.ones((60, 60)), 0, 1, 3, 3)


def _exhaustive_colorful_mean(Y, j0, jl, b, l):
    n, d = Y.shape
    total = 0.0
    count = 0
    for a in itertools.product(range(l + 1), repeat=d):
        for c in itertools.product(range(b * l), repeat=n):
            total += colorful_sums(Y, a, c, b, l, [j0])[0, jl]
            count += 1
    return math.exp(log_colorful_rescale(b, l)) * total / count


@pytest.mark.parametrize("n,d,b,l", [(3, 3, 1, 1), (3, 3, 1, 2), (4, 4, 1, 2), (3, 4, 3, 1)])
def test_colorings_unbiased_exhaustive(n, d, b, l):
    Y = np.random.default_rng(n * 10 + d).standard_normal((n, d))
    exact = path_graph_sum(Y, 0, d - 1, b, l)
    assert _exhaustive_colorful_mean(Y, 0, d - 1, b, l) == pytest.approx(exact, rel=1e-10, abs=1e-12)


@given(st.integers(0, 10**6))
def test_palette_permutation_invariance(seed):
    g = np.random.default_rng(seed)
    n, d, b, l = 5, 5, 1, 2
    Y = g.standard_normal((n, d))
    a = g.integers(0, l + 1, d)
    c = g.integers(0, b * l, n)
    pa = g.permutation(l + 1)
    pc = g.permutation(b * l)
    base = colorful_sums(Y, a, c, b, l)
    assert np.allclose(colorful_sums(Y, pa[a], pc[c], b, l), base, rtol=1e-12, atol=1e-12)


def test_color_coded_matches_oracle():
    Y = np.random.default_rng(7).standard_normal((6, 6))
    params = ColorCodingParams(1, 2, 2000)
    ln_k = kappa(6, 3, 2.0, 1, 2)
    pairs = [(0, 1), (2, 5), (4, 3)]
    for j0, jl in pairs:
        got = color_coded_P(Y, j0, jl, params, ln_k)
        want = brute_force_P(Y, j0, jl, 1, 2, ln_k)
        assert abs(float(got) - want) <= 5 * got.stderr


def test_color_coded_zero_and_guard():
    params = ColorCodingParams(1, 2, 3)
    assert float(color_coded_P(np.zeros((4, 4)), 0, 1, params, 0.0)) == 0
    with pytest.raises(CapacityError):
        colorful_sums(np.ones((30, 3)), [0, 1, 2], [0] * 30, 5, 5)
    with pytest.raises(InputError):
        ColorCodingParams(b=2)


def test_poly_estimator_two_columns():
    Y = np.array([[1.0, -2.0], [0.5, -1.0], [1.0, 0.2]])
    est = poly_estimator(Y, 2, 1.0, ColorCodingParams(1, 1, 50))
    P = est.diagnostics
    assert abs(est.v_hat[0]) == pytest.approx(1 / math.sqrt(2))
    p = path_graph_sum(Y, 0, 1, 1, 1)
    assert np.sign(est.v_hat[1]) == np.sign(p) * np.sign(est.v_hat[0])
    assert P["max_std"] is not None


def test_poly_estimator_noiseless_brute_force():
    v0 = sample_flat_sparse_vector(6, 3, 2)
    u0 = np.random.default_rng(2).standard_normal(8)
    Y = math.sqrt(3.0) * np.outer(u0, v0)
    est = poly_estimator(Y, 3, 3.0, ColorCodingParams(1, 2), brute_force=True)
    assert corr2(est.v_hat, v0) >= 0.9
    est = poly_estimator(Y, 3, 3.0, ColorCodingParams(1, 2, 300))
    assert corr2(est.v_hat, v0) >= 0.9
