"""Dense linear-algebra primitives shared by every estimator.

Entrywise thresholding, a top-eigenpair routine, support restriction and the
squared-correlation score.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateInputError, InputError

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000
# above this size top_eigenvector(method="auto") switches from LAPACK to power iteration
DENSE_LIMIT = 1500


def as_matrix(M, name="M"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InputError(f"{name} must be a non-empty 2-d array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError(f"{name} has non-finite entries")
    return M


def as_vector(v, name="v"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise InputError(f"{name} must be a non-empty 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} has non-finite entries")
    return v


def hard_threshold(M, tau, zero_diagonal=False):
    """Keep entries with ``|M_ij| >= tau``, zero the rest.

    With ``zero_diagonal`` the diagonal is forced to zero afterwards.
    """
    M = as_matrix(M)
    if tau < 0:
        raise InputError("tau must be nonnegative")
    if zero_diagonal and M.shape[0] != M.shape[1]:
        raise InputError("zero_diagonal requires a square matrix")
    out = np.where(np.abs(M) >= tau, M, 0.0)
    if zero_diagonal:
        np.fill_diagonal(out, 0.0)
    return out


def soft_threshold(M, tau):
    """Shrink entries toward zero by ``tau``; entries below ``tau`` in magnitude vanish."""
    M = as_matrix(M)
    if tau < 0:
        raise InputError("tau must be nonnegative")
    return np.where(np.abs(M) >= tau, M - np.sign(M) * tau, 0.0)


@dataclass(frozen=True)
class EigResult:
    vector: np.ndarray
    value: float
    iterations: int
    residual: float


def sign_normalize(v, atol=1e-10):
    """Flip ``v`` so that its first non-negligible coordinate is nonnegative."""
    scale = np.max(np.abs(v)) if v.size else 0.0
    idx = np.flatnonzero(np.abs(v) > atol * scale)
    if idx.size and v[idx[0]] < 0:
        return -v
    return v


def _check_symmetric(M):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InputError("matrix must be square")
    scale = max(np.max(np.abs(M)), 1e-300)
    if np.max(np.abs(M - M.T)) > 1e-9 * scale:
        raise InputError("matrix must be symmetric")
    return 0.5 * (M + M.T)


def _residual(M, v, lam, fro):
    return float(np.linalg.norm(M @ v - lam * v) / fro)


def _dense_top(M, tol):
    w, V = np.linalg.eigh(M)
    top = w[-1]
    spread = max(abs(w[0]), abs(w[-1]))
    # eigenvalues this close to the top are treated as one eigenspace
    tied = w >= top - max(tol, 1e-10) * spread
    basis = V[:, tied]
    # canonical representative: projection of the lowest-index basis vector
    # with a non-negligible component in the top eigenspace
    for j in range(M.shape[0]):
        p = basis @ basis[j]
        nrm = np.linalg.norm(p)
        if nrm > 1e-8:
            return p / nrm, float(top)
    raise AssertionError("unreachable: eigenspace has no support")


def _power(M, x, tol, max_iter, fro, shift):
    """Power iteration on ``M + shift*I``; returns (vector, value, iterations, residual)."""
    best = None
    for it in range(1, max_iter + 1):
        y = M @ x + shift * x
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return x, 0.0, it, _residual(M, x, 0.0, fro)
        x = y / nrm
        lam = float(x @ (M @ x))
        res = _residual(M, x, lam, fro)
        if best is None or res < best[3]:
            best = (x, lam, it, res)
        if res <= tol:
            return x, lam, it, res
    return best


def top_eigenvector(M, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=0, method="auto"):
    """Top (algebraically largest) eigenpair of a symmetric matrix.

    ``method="power"`` runs shifted power iteration from a seeded random start;
    ``"dense"`` uses a LAPACK symmetric eigensolver and breaks ties inside a
    degenerate top eigenspace toward the lowest coordinate index; ``"auto"``
    picks dense up to ``DENSE_LIMIT`` rows.

    The returned vector has unit norm and a nonnegative first nonzero entry.
    Raises ``ConvergenceError`` (carrying the best iterate) when power
    iteration does not reach ``tol`` within ``max_iter`` steps.
    """
    M = _check_symmetric(M)
    d = M.shape[0]
    fro = float(np.linalg.norm(M))
    if fro == 0.0:
        raise DegenerateInputError("zero matrix has no distinguished top eigenvector")
    if method == "auto":
        method = "dense" if d <= DENSE_LIMIT else "power"

    if method == "dense":
        v, lam = _dense_top(M, tol)
        v = sign_normalize(v)
        return EigResult(v, lam, 1, _residual(M, v, lam, fro))
    if method != "power":
        raise InputError(f"unknown method {method!r}")

    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(d)
    x0 /= np.linalg.norm(x0)

    # first pass finds the eigenvalue of largest magnitude
    budget = max(1, max_iter // 2)
    x, lam, it1, res = _power(M, x0, tol, budget, fro, 0.0)
    if res <= tol and lam >= 0:
        v = sign_normalize(x)
        return EigResult(v, float(v @ M @ v), it1, res)
    # dominant eigenvalue negative or a +/- pair: shift so the top eigenvalue dominates
    rho = float(np.linalg.norm(M @ x))
    shift = max(rho, abs(lam)) * (1.0 + 1e-3)
    x, lam, it2, res = _power(M, x0, tol, max_iter - it1, fro, shift)
    v = sign_normalize(x)
    result = EigResult(v, lam, it1 + it2, res)
    if res > tol:
        raise ConvergenceError(
            f"power iteration did not reach tol={tol:g} (residual {res:.3g})", best=result
        )
    return result


def top_k_restrict(v, k):
    """Keep the ``k`` largest-magnitude coordinates of ``v`` and renormalize.

    Ties are broken toward the lowest index.
    """
    v = as_vector(v)
    if not 1 <= k <= v.size:
        raise InputError(f"k must lie in [1, {v.size}], got {k}")
    if not np.any(v):
        raise DegenerateInputError("cannot restrict an all-zero vector")
    order = np.argsort(-np.abs(v), kind="stable")
    out = np.zeros_like(v)
    keep = order[:k]
    out[keep] = v[keep]
    # pre-scale so subnormal entries do not underflow the norm
    out /= np.max(np.abs(out))
    return out / np.linalg.norm(out)


def corr2(a, b):
    """Squared cosine between ``a`` and ``b``; invariant to scale and sign."""
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise InputError("vectors must have equal dimension")
    na = float(a @ a)
    nb = float(b @ b)
    if na == 0.0 or nb == 0.0:
        raise InputError("corr2 is undefined for zero vectors")
    c = float(a @ b) ** 2 / (na * nb)
    return min(1.0, max(0.0, c))
