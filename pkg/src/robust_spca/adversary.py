"""Explicit perturbation matrices that defeat fragile sparse-PCA estimators.

Each constructor returns a dense ``n x d`` matrix ``E`` to be added to the
observation ``Y``.  The moment-matching construction also needs a finitely
supported symmetric distribution whose even moments are prescribed; it is
built by nonnegative least squares over a symmetric grid.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, nnls

from .core import as_matrix, as_vector
from .errors import DegenerateInputError, InfeasibleMomentsError, InputError, RegimeError
from .rng import make_rng

MAX_ORDER = 20
GRID_PAIRS = 64
MOMENT_TOL = 1e-8


# --------------------------------------------------------------------------
# adversary specifications


@dataclass(frozen=True)
class Whitening:
    tag = "whitening"


@dataclass(frozen=True)
class DtFool:
    b: float
    tag = "dt"

    def __post_init__(self):
        if self.b < 0:
            raise InputError("b must be nonnegative")


@dataclass(frozen=True)
class CtFool:
    b: float
    r: int = 1
    tag = "ct"

    def __post_init__(self):
        if self.b < 0:
            raise InputError("b must be nonnegative")
        if self.r < 1:
            raise InputError("r must be at least 1")


@dataclass(frozen=True)
class MomentMatching:
    lam: float
    delta: float
    s: object = "auto"  # "auto" or an explicit even integer
    tag = "moment"

    def __post_init__(self):
        if self.lam < 0:
            raise InputError("lambda must be nonnegative")
        if not 0 < self.delta < 1:
            raise InputError("delta must lie in (0, 1)")
        if self.s != "auto":
            if int(self.s) != self.s or self.s < 0 or self.s % 2:
                raise InputError("explicit s must be an even integer >= 0")


def adversary_tag(spec):
    return "none" if spec is None else spec.tag


# --------------------------------------------------------------------------
# whitening


def whitening_gamma(u0_norm, beta, d):
    """Smaller root of ``g^2 |u|^2 - 2 g |u| + beta |u|^2 / d = 0``."""
    disc = 1.0 - beta * u0_norm**2 / d
    if disc < 0:
        raise RegimeError(
            f"whitening impossible: beta*|u0|^2 = {beta * u0_norm**2:.4g} exceeds d = {d}"
        )
    if u0_norm == 0:
        return 0.0
    # 1 - sqrt(1 - x) written to avoid cancellation for small x
    x = beta * u0_norm**2 / d
    return (x / (1.0 + math.sqrt(disc))) / u0_norm


def whitening_adversary(W, u0, beta, d=None):
    """Rank-one perturbation that flattens the variance of ``Y`` along ``u0``.

    Along the unit direction ``u0/|u0|`` the noise is shrunk by the factor
    ``gamma*|u0|`` so that ``|u0^T Y|^2 / |u0|^2`` matches the chi-square
    level of any direction orthogonal to ``u0``.
    """
    W = as_matrix(W, "W")
    u0 = as_vector(u0, "u0")
    d = W.shape[1] if d is None else d
    nrm = float(np.linalg.norm(u0))
    gamma = whitening_gamma(nrm, beta, d)
    if gamma == 0.0 or nrm == 0.0:
        return np.zeros_like(W)
    u_hat = u0 / nrm
    return -(gamma * nrm) * np.outer(u_hat, u_hat @ W)


# --------------------------------------------------------------------------
# diagonal- and covariance-thresholding adversaries


def dt_adversary(W, v0, b):
    """Inflate every off-support column of ``W`` by ``b`` along itself."""
    W = as_matrix(W, "W")
    v0 = as_vector(v0, "v0")
    off = v0 == 0
    E = np.zeros_like(W)
    if b == 0:
        return E
    norms = np.linalg.norm(W[:, off], axis=0)
    if np.any(norms == 0):
        raise DegenerateInputError("W has a zero column off the support")
    E[:, off] = b * W[:, off] / norms
    return E


def ct_adversary(W, v0, b, r, rng, u0=None):
    """Plant ``r`` disjoint rank-one sign blocks outside the support.

    The off-support columns are shuffled and split into ``r`` contiguous
    blocks.  Block ``i`` gets direction ``x_i`` (orthonormal, orthogonal to
    ``u0`` when given, drawn independently of ``W``) and entries ``+-b`` signed
    by ``<w_l, x_i>``, so every nonzero column of ``E`` has norm ``b``.
    """
    W = as_matrix(W, "W")
    v0 = as_vector(v0, "v0")
    rng = make_rng(rng)
    n, d = W.shape
    off = np.flatnonzero(v0 == 0)
    if r < 1 or r > n - 1:
        raise InputError(f"r must lie in [1, n-1] = [1, {n - 1}], got {r}")
    if off.size < r:
        raise InputError(f"need at least r={r} off-support columns, have {off.size}")
    G = rng.standard_normal((n, r))
    X, _ = np.linalg.qr(G)
    if u0 is not None:
        u_hat = as_vector(u0, "u0") / np.linalg.norm(u0)
        X = X - np.outer(u_hat, u_hat @ X)
        X, _ = np.linalg.qr(X)
    perm = rng.permutation(off)
    blocks = np.array_split(perm, r)
    E = np.zeros_like(W)
    if b == 0:
        return E
    for i, block in enumerate(blocks):
        x = X[:, i]
        signs = np.where(x @ W[:, block] >= 0, 1.0, -1.0)
        E[:, block] = np.outer(x, b * signs)
    return E


# --------------------------------------------------------------------------
# moment-matching distribution


def double_factorial_odd(r):
    """``(r-1)!!`` for even ``r`` in exact integer arithmetic."""
    if r % 2 or r < 0:
        raise InputError("r must be even and nonnegative")
    if r > MAX_ORDER:
        raise InputError(f"moment order {r} beyond supported maximum {MAX_ORDER}")
    out = 1
    for j in range(r - 1, 0, -2):
        out *= j
    return out


def auto_order(lam, delta):
    """Largest even ``s`` with ``delta * lam**s <= 2**(-10 s)``, capped at ``MAX_ORDER``."""
    s = 0
    while s + 2 <= MAX_ORDER and delta * lam ** (s + 2) <= 2.0 ** (-10 * (s + 2)):
        s += 2
    if s == MAX_ORDER:
        warnings.warn(f"moment order capped at {MAX_ORDER}", stacklevel=2)
    return s


def moment_targets(lam, delta, s):
    """Even moments ``M_r = ((r-1)!! - delta lam^r) / (1 - delta)`` for ``r <= s``."""
    return {r: (double_factorial_odd(r) - delta * lam**r) / (1.0 - delta) for r in range(0, s + 1, 2)}


def support_bound(s):
    if s < 2:
        return 1.0
    return max(1.0, 10.0 * math.sqrt(s * math.log(s)))


@dataclass(frozen=True)
class MomentDistribution:
    """Finitely supported symmetric law, stored as its nonnegative half.

    ``half_locations`` are ``>= 0``; a location ``x > 0`` with weight ``w``
    stands for the two atoms ``+-x`` with weight ``w/2`` each, and ``x = 0``
    is a single atom.
    """

    half_locations: np.ndarray
    half_weights: np.ndarray
    s: int
    targets: dict
    residual: float
    bound: float
    lam: float = 0.0
    delta: float = 0.0

    @property
    def atoms(self):
        """Symmetric list of ``(location, weight)`` pairs, sorted by location."""
        out = []
        for x, w in zip(self.half_locations, self.half_weights):
            if x == 0:
                out.append((0.0, float(w)))
            else:
                out.append((-float(x), float(w) / 2))
                out.append((float(x), float(w) / 2))
        return sorted(out)

    def moment(self, r):
        if r % 2:
            # each +-x pair cancels exactly
            total = 0.0
            for x, w in zip(self.half_locations, self.half_weights):
                if x != 0:
                    total += (w / 2) * x**r + (w / 2) * (-x) ** r
            return total
        return float(np.sum(self.half_weights * self.half_locations**r)) if r else float(
            np.sum(self.half_weights)
        )

    def sample(self, size, rng):
        rng = make_rng(rng)
        idx = rng.choice(self.half_locations.size, size=size, p=self.half_weights / self.half_weights.sum())
        mags = self.half_locations[idx]
        signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return mags * signs


def _hankel_violation(targets, s, bound):
    """Describe the first failed Hankel (Stieltjes) condition, or return None.

    For a symmetric law on ``[-B, B]`` the even moments are moments
    ``m_i = M_{2i}`` of ``y = x^2`` on ``[0, B^2]``; both the moment matrix
    ``[m_{i+j}]`` and ``[m_{i+j+1}]`` and the localized matrix
    ``[B^2 m_{i+j} - m_{i+j+1}]`` must be PSD.
    """
    m = [targets[r] for r in range(0, s + 1, 2)]
    top = len(m) - 1
    B2 = bound**2
    checks = []
    h = top // 2
    checks.append(("[M_{2(i+j)}]", np.array([[m[i + j] for j in range(h + 1)] for i in range(h + 1)])))
    h1 = (top - 1) // 2
    if top >= 1:
        checks.append(
            ("[M_{2(i+j+1)}]", np.array([[m[i + j + 1] for j in range(h1 + 1)] for i in range(h1 + 1)]))
        )
        checks.append(
            (
                "[B^2 M_{2(i+j)} - M_{2(i+j+1)}]",
                np.array([[B2 * m[i + j] - m[i + j + 1] for j in range(h1 + 1)] for i in range(h1 + 1)]),
            )
        )
    for name, H in checks:
        scale = max(np.max(np.abs(H)), 1e-300)
        ev = np.linalg.eigvalsh(H / scale)
        if ev[0] < -1e-12:
            return f"Hankel matrix {name} is not PSD (min scaled eigenvalue {ev[0]:.3g})"
    return None


def _fit_grid(targets, s, bound, pairs):
    orders = list(range(0, s + 1, 2))
    locs = np.concatenate([[0.0], bound * np.arange(1, pairs + 1) / pairs])
    A = np.array([locs**r if r else np.ones_like(locs) for r in orders])
    b = np.array([targets[r] for r in orders])
    row_scale = np.array([max(1.0, bound**r) for r in orders])
    w, _ = nnls(A / row_scale[:, None], b / row_scale, maxiter=50 * A.shape[1])
    active = np.flatnonzero(w > 0)
    # polish on the active set to remove NNLS round-off
    if active.size:
        sub = A[:, active] / row_scale[:, None]
        refined, *_ = np.linalg.lstsq(sub, b / row_scale, rcond=None)
        if np.all(refined >= 0):
            w = np.zeros_like(w)
            w[active] = refined
    residual = float(np.max(np.abs(A @ w - b)))
    if residual <= MOMENT_TOL:
        w = _gaussian_tiebreak(A, b, row_scale, locs, s, w)
        residual = float(np.max(np.abs(A @ w - b)))
    keep = w > 0
    return locs[keep], w[keep], residual


def _polish(A, b, row_scale, w):
    active = np.flatnonzero(w > 0)
    if not active.size:
        return w
    sub = A[:, active] / row_scale[:, None]
    refined, *_ = np.linalg.lstsq(sub, b / row_scale, rcond=None)
    if np.any(refined < 0):
        return w
    out = np.zeros_like(w)
    out[active] = refined
    return out


def _gaussian_tiebreak(A, b, row_scale, locs, s, w_fit):
    """Among exact grid fits, prefer the one whose order-(s+2) moment is closest to Gaussian.

    Plain NNLS tends to put mass at the far end of the grid, which leaves the
    first unmatched moment far above its Gaussian value.  Falls back to the
    NNLS weights if the linear program fails or loses accuracy.
    """
    r = s + 2
    target = double_factorial_odd(r) if r <= MAX_ORDER else None
    if target is None:
        return w_fit
    g = locs**r / target
    m = locs.size
    # variables (w, t): minimize t subject to |g.w - 1| <= t, A w = b, w >= 0
    c = np.zeros(m + 1)
    c[-1] = 1.0
    A_ub = np.vstack([np.append(g, -1.0), np.append(-g, -1.0)])
    b_ub = np.array([1.0, -1.0])
    A_eq = np.hstack([A / row_scale[:, None], np.zeros((A.shape[0], 1))])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b / row_scale, bounds=[(0, None)] * (m + 1), method="highs")
    if res.status != 0:
        return w_fit
    w = _polish(A, b, row_scale, np.where(res.x[:m] > 1e-14, res.x[:m], 0.0))
    if float(np.max(np.abs(A @ w - b))) > MOMENT_TOL or np.any(w < 0):
        return w_fit
    return w


def build_moment_distribution(lam, delta, s_mode="auto"):
    """Symmetric finitely supported law matching the moment-adversary targets.

    ``s_mode="auto"`` chooses the largest even ``s`` allowed by
    ``delta*lam**s <= 2**(-10 s)``; an explicit even integer bypasses that
    condition (with a warning when it is violated) and only requires the
    targets to be realizable.
    """
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if s_mode == "auto":
        s = auto_order(lam, delta)
    else:
        s = int(s_mode)
        if s != s_mode or s < 0 or s % 2:
            raise InputError("explicit s must be an even integer >= 0")
        if s > MAX_ORDER:
            raise InputError(f"s={s} beyond supported maximum {MAX_ORDER}")
        if delta * lam**s > 2.0 ** (-10 * s):
            warnings.warn(
                f"explicit s={s} violates delta*lam^s <= 2^(-10 s); fitting targets anyway",
                stacklevel=2,
            )
    targets = moment_targets(lam, delta, s)
    bound = support_bound(s)
    if s == 0:
        return MomentDistribution(np.array([0.0]), np.array([1.0]), 0, targets, 0.0, bound, lam, delta)

    violation = _hankel_violation(targets, s, bound)
    if violation is None:
        for pairs in (GRID_PAIRS, 4 * GRID_PAIRS):
            locs, w, residual = _fit_grid(targets, s, bound, pairs)
            if residual <= MOMENT_TOL:
                return MomentDistribution(locs, w, s, targets, residual, bound, lam, delta)
        violation = f"grid fit residual {residual:.3g} exceeds {MOMENT_TOL:g}"
    raise InfeasibleMomentsError(
        f"moments for lambda={lam}, delta={delta}, s={s} are not realizable: {violation}"
    )


def moment_adversary(W, u, v_tilde, dist, rng):
    """``E = u (v' - W^T u)^T`` with ``v'`` drawn from ``dist`` off the support of ``v_tilde``."""
    return moment_perturbation(W, u, v_tilde, dist, rng)[0]


def moment_perturbation(W, u, v_tilde, dist, rng):
    """Like ``moment_adversary`` but also returns the drawn ``v'``."""
    W = as_matrix(W, "W")
    u = as_vector(u, "u")
    v_tilde = as_vector(v_tilde, "v_tilde")
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise InputError("u must be a unit vector")
    if W.shape != (u.size, v_tilde.size):
        raise InputError("dimension mismatch between W, u and v_tilde")
    rng = make_rng(rng)
    v_prime = np.zeros(v_tilde.size)
    off = v_tilde == 0
    v_prime[off] = dist.sample(int(off.sum()), rng)
    return np.outer(u, v_prime - W.T @ u), v_prime


def build_perturbation(spec, W, u0, v0, beta, rng):
    """Dispatch an adversary spec to its constructor for the Wishart model."""
    if spec is None:
        return np.zeros_like(W)
    if isinstance(spec, Whitening):
        return whitening_adversary(W, u0, beta)
    if isinstance(spec, DtFool):
        return dt_adversary(W, v0, spec.b)
    if isinstance(spec, CtFool):
        return ct_adversary(W, v0, spec.b, spec.r, rng, u0=u0)
    if isinstance(spec, MomentMatching):
        raise InputError("moment-matching adversary applies to the subspace model only")
    raise InputError(f"unknown adversary spec {spec!r}")
