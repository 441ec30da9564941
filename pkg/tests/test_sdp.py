import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robust_spca.core import corr2
from robust_spca.errors import CapacityError, InputError
from robust_spca.model import ModelParams, sample_flat_sparse_vector, sample_wishart_instance
from robust_spca.sdp import (
    SdpOptions,
    audit_feasibility,
    project_l1_ball,
    project_simplex,
    project_spectrahedron,
    sdp_estimate,
    sdp_round,
    solve_basic_sdp,
)


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-10, 10)))
def test_simplex_projection(x):
    p = project_simplex(x)
    assert np.all(p >= 0) and abs(p.sum() - 1) <= 1e-12
    # optimality: p minimizes distance, so <x - p, q - p> <= 0 for vertices q
    for i in range(x.size):
        q = np.zeros_like(x)
        q[i] = 1
        assert (x - p) @ (q - p) <= 1e-9


@given(arrays(np.float64, st.integers(1, 12), elements=st.floats(-10, 10)), st.floats(0.1, 5))
def test_l1_ball_projection(v, r):
    p = project_l1_ball(v, r)
    assert np.abs(p).sum() <= r * (1 + 1e-12)
    if np.abs(v).sum() <= r:
        assert np.array_equal(p, v)
    assert np.all(p * v >= 0)


def test_spectrahedron_projection(rng):
    A = rng.standard_normal((6, 6))
    P = project_spectrahedron(A + A.T)
    assert np.linalg.eigvalsh(P)[0] >= -1e-12
    assert np.trace(P) == pytest.approx(1, abs=1e-12)


def _gram_root(S):
    w, V = np.linalg.eigh(S)
    return (V * np.sqrt(np.maximum(w, 0))).T


def test_identity_and_diagonal_examples():
    sol = solve_basic_sdp(np.eye(4), 1)
    assert sol.objective == pytest.approx(1, abs=1e-5)
    sol = solve_basic_sdp(_gram_root(np.diag([2.0, 1.0])), 1)
    assert sol.objective == pytest.approx(2, abs=1e-5)
    assert np.allclose(sol.X, [[1, 0], [0, 0]], atol=1e-5)


def test_relaxation_dominates_flat_candidates(rng):
    Y = rng.standard_normal((20, 8))
    S = Y.T @ Y
    sol = solve_basic_sdp(Y, 3)
    best = 0.0
    for supp in itertools.combinations(range(8), 3):
        for signs in itertools.product((-1, 1), repeat=3):
            v = np.zeros(8)
            v[list(supp)] = np.array(signs) / math.sqrt(3)
            best = max(best, v @ S @ v)
    assert sol.converged
    assert sol.objective >= best - 1e-4


def test_converged_solution_postconditions(rng):
    inst = sample_wishart_instance(ModelParams(30, 25, 4, 3.0, seed=2))
    sol = solve_basic_sdp(inst.Y, 4)
    assert sol.converged
    assert sol.min_eig >= -1e-6 and sol.trace_residual <= 1e-6 and sol.l1_excess <= 4e-6
    rep = audit_feasibility(sol.X, 4, inst.Y, inst.truth.v0)
    assert rep.feasible() and rep.lemma_holds
    assert rep.dominance_gap >= -1e-4 * np.linalg.norm(inst.Y.T @ inst.Y, 2)


def test_rounding_examples():
    v0 = sample_flat_sparse_vector(7, 3, 1)

    class Sol:
        X = np.outer(v0, v0)
        iterations, converged, objective, wall_ms = 0, True, 0.0, 0.0

    assert corr2(sdp_round(Sol).v_hat, v0) == pytest.approx(1)
    Sol.X = np.eye(5) / 5
    assert np.array_equal(sdp_round(Sol).v_hat, [1, 0, 0, 0, 0])


def test_noiseless_recovery():
    v0 = sample_flat_sparse_vector(30, 5, 3)
    u0 = np.random.default_rng(3).standard_normal(20)
    est = sdp_estimate(math.sqrt(10) * np.outer(u0, v0), 5)
    assert corr2(est.v_hat, v0) >= 0.99


def test_audit_examples():
    v0 = sample_flat_sparse_vector(9, 4, 0)
    Y = np.random.default_rng(0).standard_normal((5, 9))
    rep = audit_feasibility(np.outer(v0, v0), 4, Y, v0)
    assert rep.l1_norm == pytest.approx(4, abs=1e-12)
    assert rep.dominance_gap == pytest.approx(0, abs=1e-9)
    rep = audit_feasibility(np.eye(9) / 9, 4, Y)
    assert rep.l1_norm == pytest.approx(1) and rep.feasible() and rep.lemma_holds


@given(st.floats(-50, 50), st.integers(0, 1000))
def test_shift_invariance(c, seed):
    inst = sample_wishart_instance(ModelParams(15, 10, 3, 4.0, seed=seed))
    a = solve_basic_sdp(inst.Y, 3, SdpOptions(max_iter=400))
    b = solve_basic_sdp(inst.Y, 3, SdpOptions(max_iter=400, shift=c))
    va = sdp_round(a).v_hat
    vb = sdp_round(b).v_hat
    assert corr2(va, vb) >= 1 - 1e-6
    assert b.objective == pytest.approx(a.objective + c, abs=1e-6 * (1 + abs(a.objective)))


def test_guards():
    with pytest.raises(CapacityError):
        solve_basic_sdp(np.ones((1, 2001)), 1)
    with pytest.raises(InputError):
        solve_basic_sdp(np.ones((2, 3)), 4)
    with pytest.raises(InputError):
        solve_basic_sdp(np.array([[np.nan, 1.0]]), 1)
    with pytest.raises(InputError):
        SdpOptions(rho0=0)
