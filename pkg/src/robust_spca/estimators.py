"""Thresholding and spectral estimators of the sparse direction ``v0``.

Every estimator takes the observation ``Y`` (``n x d``) and the sparsity
``k`` and returns an :class:`Estimate` holding a unit vector in ``R^d``.
"""

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    as_matrix,
    as_vector,
    hard_threshold,
    sign_normalize,
    top_eigenvector,
    top_k_restrict,
)
from .errors import DegenerateInputError, InputError

TOP_K = "top_k"
THRESHOLD = "threshold"


@dataclass(frozen=True)
class EstimatorOptions:
    """Knobs shared by the estimator family.

    ``tau`` is interpreted per estimator: the entry threshold for covariance
    thresholding (``None`` selects the default), and the coordinate threshold
    ``tau/sqrt(k)`` for SVD-t in threshold mode.  ``coef_n`` switches the
    SVD-t coefficients from ``n - 1`` to ``n``.
    """

    tau: float = None
    output_mode: str = TOP_K
    zero_diagonal: bool = True
    coef_n: bool = False
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0

    def __post_init__(self):
        if self.tau is not None and not self.tau >= 0:
            raise InputError("tau must be nonnegative")
        if self.output_mode not in (TOP_K, THRESHOLD):
            raise InputError(f"unknown output_mode {self.output_mode!r}")


@dataclass(frozen=True)
class Estimate:
    v_hat: np.ndarray
    algo: str
    options: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def _check(Y, k):
    Y = as_matrix(Y, "Y")
    if not 1 <= k <= Y.shape[1]:
        raise InputError(f"k must lie in [1, d={Y.shape[1]}], got {k}")
    return Y


def _eig(M, opts):
    return top_eigenvector(M, tol=opts.tol, max_iter=opts.max_iter, seed=opts.seed)


def _finish(v, algo, opts, eig, t0, **extra):
    v = sign_normalize(v / np.linalg.norm(v))
    diag = {
        "eigenvalue": eig.value,
        "iterations": eig.iterations,
        "wall_ms": 1e3 * (time.perf_counter() - t0),
    }
    diag.update(extra)
    return Estimate(v, algo, asdict(opts), diag)


def diagonal_thresholding(Y, k, opts=None):
    """Top eigenvector of ``Y^T Y`` restricted to its ``k`` largest diagonal entries."""
    opts = opts or EstimatorOptions()
    t0 = time.perf_counter()
    Y = _check(Y, k)
    diag = np.einsum("ij,ij->j", Y, Y)
    S = np.sort(np.argsort(-diag, kind="stable")[:k])
    YS = Y[:, S]
    eig = _eig(YS.T @ YS, opts)
    v = np.zeros(Y.shape[1])
    v[S] = eig.vector
    return _finish(v, "dt", opts, eig, t0, support=S.tolist())


def default_ct_tau(n, d, k):
    return math.sqrt(n * max(1.0, math.log(d / k**2)))


def covariance_thresholding(Y, k, opts=None):
    """Top eigenvector of the hard-thresholded centered covariance ``eta_tau(Y^T Y - n I)``."""
    opts = opts or EstimatorOptions()
    t0 = time.perf_counter()
    Y = _check(Y, k)
    n, d = Y.shape
    tau = default_ct_tau(n, d, k) if opts.tau is None else opts.tau
    M = Y.T @ Y
    M[np.diag_indices(d)] -= n
    T = hard_threshold(M, tau, zero_diagonal=opts.zero_diagonal) if math.isfinite(tau) else np.zeros_like(M)
    if not np.any(T):
        raise DegenerateInputError(f"threshold tau={tau:g} removed every entry")
    eig = _eig(T, opts)
    return _finish(eig.vector, "ct", opts, eig, t0, tau=tau)


def top_right_singular_vector(Y, opts):
    """Top right singular vector of ``Y``, computed on the smaller Gram matrix."""
    n, d = Y.shape
    if n < d:
        eig = _eig(Y @ Y.T, opts)
        v = Y.T @ eig.vector
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise DegenerateInputError("Y has no nonzero singular value")
        return v / nrm, eig
    eig = _eig(Y.T @ Y, opts)
    return eig.vector, eig


def svd_thresholding(Y, k, opts=None):
    """Top right singular vector restricted to its ``k`` largest coordinates."""
    opts = opts or EstimatorOptions()
    t0 = time.perf_counter()
    Y = _check(Y, k)
    v, eig = top_right_singular_vector(Y, opts)
    return _finish(top_k_restrict(v, k), "svd", opts, eig, t0)


def svd_t_coefficients(sq_norms, n, degree, coef_n=False):
    """Column weights ``c_degree(y_i)`` as a function of ``||y_i||^2``."""
    m = n if coef_n else n - 1
    sq_norms = np.asarray(sq_norms, dtype=np.float64)
    if degree == 2:
        return np.ones_like(sq_norms)
    c4 = sq_norms - m
    if degree == 4:
        return c4
    if degree == 6:
        return c4**2 - 2 * m
    raise InputError(f"degree must be 2, 4 or 6, got {degree}")


def svd_t_matrix(Y, degree, coef_n=False):
    """``A = sum_i c(y_i) y_i y_i^T`` over the columns ``y_i`` of ``Y``."""
    Y = as_matrix(Y, "Y")
    c = svd_t_coefficients(np.einsum("ij,ij->j", Y, Y), Y.shape[0], degree, coef_n)
    return (Y * c) @ Y.T


def svd_t(Y, k, degree=4, opts=None):
    """Reweighted spectral estimator.

    The left factor ``u`` is estimated as the top eigenvector of the
    column-reweighted Gram matrix; ``v`` is read off from ``Y^T u`` either by
    keeping its top ``k`` coordinates or by thresholding.
    """
    opts = opts or EstimatorOptions()
    t0 = time.perf_counter()
    Y = _check(Y, k)
    A = svd_t_matrix(Y, degree, opts.coef_n)
    if not np.linalg.norm(A):
        raise DegenerateInputError("reweighted Gram matrix is zero")
    eig = _eig(A, opts)
    if opts.output_mode == TOP_K:
        v_raw = Y.T @ eig.vector
        if not np.any(v_raw):
            raise DegenerateInputError("Y^T u_hat vanished")
        v = top_k_restrict(v_raw, k)
    else:
        tau = 1.0 if opts.tau is None else opts.tau
        v = recover_v_from_u(Y, eig.vector, None, tau, k)
    return _finish(v, f"svd{degree}", opts, eig, t0)


def recover_v_from_u(Y, u_hat, beta=None, tau=0.0, k=1):
    """Estimate ``v`` from an estimate of the left factor.

    ``v_raw = u_hat^T Y / (sqrt(beta) ||u_hat||^2)``; with ``beta=None`` the
    raw vector is unit-normalized instead.  Coordinates below ``tau/sqrt(k)``
    in magnitude are zeroed and the result is renormalized.
    """
    Y = as_matrix(Y, "Y")
    u_hat = as_vector(u_hat, "u_hat")
    if u_hat.size != Y.shape[0]:
        raise InputError("u_hat length must equal the number of rows of Y")
    nu2 = float(u_hat @ u_hat)
    if nu2 == 0:
        raise InputError("u_hat must be nonzero")
    if tau < 0:
        raise InputError("tau must be nonnegative")
    v = Y.T @ u_hat
    if beta is None:
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise DegenerateInputError("u_hat^T Y vanished")
        v = v / nrm
    else:
        if beta <= 0:
            raise InputError("beta must be positive")
        v = v / (math.sqrt(beta) * nu2)
    v = np.where(np.abs(v) >= tau / math.sqrt(k), v, 0.0)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DegenerateInputError(f"threshold tau={tau:g} zeroed every coordinate")
    return v / nrm


ALGORITHMS = {
    "dt": diagonal_thresholding,
    "ct": covariance_thresholding,
    "svd": svd_thresholding,
    "svd2": lambda Y, k, opts=None: svd_t(Y, k, 2, opts),
    "svd4": lambda Y, k, opts=None: svd_t(Y, k, 4, opts),
    "svd6": lambda Y, k, opts=None: svd_t(Y, k, 6, opts),
}
