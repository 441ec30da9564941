"""The basic semidefinite relaxation of sparse PCA.

    maximize <S, X>  subject to  X psd,  Tr X = 1,  sum_ij |X_ij| <= k,

with ``S = Y^T Y``, solved by ADMM on the splitting ``X = Z``: the
``X``-step projects onto the spectrahedron and the ``Z``-step onto the
entrywise l1 ball.
"""

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .core import as_matrix, top_eigenvector
from .errors import CapacityError, InputError
from .estimators import Estimate

MAX_DIM = 2000


@dataclass(frozen=True)
class SdpOptions:
    max_iter: int = 5000
    rho0: float = 1.0
    tol: float = 1e-6
    # solve with S + shift*I; only the objective value changes on the feasible set
    shift: float = 0.0
    adaptive_rho: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise InputError("max_iter must be positive")
        if not self.rho0 > 0:
            raise InputError("rho0 must be positive")
        if not self.tol > 0:
            raise InputError("tol must be positive")


@dataclass(frozen=True)
class SdpSolution:
    X: np.ndarray
    objective: float
    min_eig: float
    trace_residual: float
    l1_excess: float
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    k: int
    wall_ms: float = 0.0


@dataclass(frozen=True)
class FeasibilityReport:
    min_eig: float
    trace_residual: float
    l1_excess: float
    l1_norm: float
    objective: float
    dominance_gap: float
    lemma_lhs: float
    lemma_rhs: float

    @property
    def lemma_holds(self):
        return self.lemma_lhs <= self.lemma_rhs

    def feasible(self, tol=1e-6):
        return self.min_eig >= -tol and self.trace_residual <= tol and self.l1_excess <= tol * max(1.0, self.l1_norm)


def project_simplex(x, total=1.0):
    """Euclidean projection of ``x`` onto ``{y >= 0, sum y = total}``."""
    x = np.asarray(x, dtype=np.float64)
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - total
    idx = np.arange(1, x.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(x - theta, 0.0)


def project_l1_ball(v, radius):
    """Euclidean projection onto ``{x : ||x||_1 <= radius}`` (sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    flat = a.ravel()
    u = np.sort(flat)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, flat.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def project_spectrahedron(M):
    """Projection of a symmetric matrix onto ``{X psd, Tr X = 1}``."""
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    lam = project_simplex(w)
    keep = lam > 0
    Vk = V[:, keep]
    return (Vk * lam[keep]) @ Vk.T


def _repair(X, k):
    """Blend toward ``Diag(X)`` just enough that ``||X||_1 <= k``.

    ``Diag(X)`` is psd with unit trace and l1 norm 1, so the blend stays in
    the spectrahedron.
    """
    total = np.abs(X).sum()
    if total <= k:
        return X
    diag = np.abs(np.diag(X)).sum()
    off = total - diag
    theta = min(1.0, (total - k) / off) if off > 0 else 1.0
    out = (1.0 - theta) * X
    out[np.diag_indices_from(out)] = np.diag(X)
    return out


def _feasibility(X, k):
    min_eig = float(np.linalg.eigvalsh(0.5 * (X + X.T))[0])
    trace_res = abs(float(np.trace(X)) - 1.0)
    l1 = float(np.abs(X).sum())
    return min_eig, trace_res, max(0.0, l1 - k), l1


def solve_basic_sdp(Y, k, opts=None):
    """Approximate maximizer of ``<Y^T Y, X>`` over the sparse spectrahedron.

    The objective is rescaled by the spectral norm of ``Y^T Y`` before
    iterating, so the stopping rule (primal and dual residual at most
    ``tol * d``) is scale free.  The best-available iterate is returned even
    when the iteration cap is hit, with ``converged=False``.
    """
    opts = opts or SdpOptions()
    t0 = time.perf_counter()
    Y = as_matrix(Y, "Y")
    d = Y.shape[1]
    if d > MAX_DIM:
        raise CapacityError(f"d={d} exceeds the dense SDP guard {MAX_DIM}")
    if not 1 <= k <= d:
        raise InputError(f"k must lie in [1, d={d}], got {k}")
    S = Y.T @ Y
    scale = float(np.linalg.eigvalsh(S)[-1])
    if scale <= 0:
        scale = 1.0
    C = S / scale
    if opts.shift:
        C = C + (opts.shift / scale) * np.eye(d)

    rho = opts.rho0
    Z = np.eye(d) / d
    U = np.zeros((d, d))
    thresh = opts.tol * d
    converged = False
    r_norm = s_norm = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        X = project_spectrahedron(Z - U + C / rho)
        Z_old = Z
        Z = project_l1_ball(X + U, k)
        U = U + X - Z
        r_norm = float(np.linalg.norm(X - Z))
        s_norm = float(rho * np.linalg.norm(Z - Z_old))
        if r_norm <= thresh and s_norm <= thresh:
            converged = True
            break
        if opts.adaptive_rho:
            if r_norm > 10 * s_norm:
                rho *= 2.0
                U /= 2.0
            elif s_norm > 10 * r_norm:
                rho /= 2.0
                U *= 2.0

    X = _repair(0.5 * (X + X.T), k)
    min_eig, trace_res, l1_excess, _ = _feasibility(X, k)
    objective = float(np.sum(S * X)) + opts.shift * float(np.trace(X))
    return SdpSolution(
        X,
        objective,
        min_eig,
        trace_res,
        l1_excess,
        it,
        converged,
        r_norm,
        s_norm,
        k,
        1e3 * (time.perf_counter() - t0),
    )


def sdp_round(sol, opts=None):
    """Top eigenvector of the SDP solution."""
    eig = top_eigenvector(sol.X)
    diag = {
        "eigenvalue": eig.value,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "objective": sol.objective,
        "wall_ms": sol.wall_ms,
    }
    return Estimate(eig.vector, "sdp", asdict(opts or SdpOptions()), diag)


def sdp_estimate(Y, k, opts=None):
    return sdp_round(solve_basic_sdp(Y, k, opts), opts)


def audit_feasibility(X, k, Y, v0=None):
    """Feasibility residuals, objective dominance over ``v0 v0^T`` and the
    ``|<M, X>| <= k ||M||_max`` certificate for ``M = Y^T Y - n I``."""
    X = as_matrix(X, "X")
    Y = as_matrix(Y, "Y")
    n = Y.shape[0]
    S = Y.T @ Y
    min_eig, trace_res, l1_excess, l1 = _feasibility(X, k)
    objective = float(np.sum(S * X))
    gap = math.nan
    if v0 is not None:
        v0 = np.asarray(v0, dtype=np.float64)
        gap = objective - float(v0 @ S @ v0)
    M = S - n * np.eye(S.shape[0])
    lhs = abs(float(np.sum(M * X)))
    rhs = k * float(np.max(np.abs(M))) * (1 + 1e-9)
    return FeasibilityReport(min_eig, trace_res, l1_excess, l1, objective, gap, lhs, rhs)
