"""Degree-O(log d) polynomial estimator built from path-shaped monomials.

For columns ``j0 != jl`` the polynomial ``P_{j0 jl}(Y)`` sums ``Y^alpha`` over
path graphs: circles (columns) ``j0, j1, ..., jl`` pairwise distinct, and for
each step ``s`` a set of ``b`` boxes (rows) joined to both ``j_{s-1}`` and
``j_s``, with the box sets of different steps disjoint.  So

    Y^alpha = prod_s prod_{i in B_s} Y[i, j_{s-1}] * Y[i, j_s].

The sum is evaluated exactly by enumeration on tiny inputs, and in
polynomial time by color coding: rows and columns are colored at random,
only colorful graphs (all circle colors distinct, all box colors distinct)
are summed by a dynamic program over used-color sets, and the result is
rescaled by the inverse probability of being colorful.
"""

import itertools
import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln

from .core import as_matrix, top_eigenvector
from .errors import CapacityError, InputError
from .estimators import Estimate
from .rng import stream

BRUTE_FORCE_LIMIT = 10**7
MAX_BOX_COLORS = 24


@dataclass(frozen=True)
class ColorCodingParams:
    b: int = 1
    l: int = 1
    n_colorings: int = 200
    c_star: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.b < 1 or self.b % 2 == 0:
            raise InputError(f"b must be an odd integer >= 1, got {self.b}")
        if self.l < 1:
            raise InputError("l must be >= 1")
        if self.n_colorings < 1:
            raise InputError("n_colorings must be >= 1")


def choose_poly_params(n, d, k, c_star=1.0):
    """``b`` = smallest odd integer above ``c_star*(max(0, ln(d/k^2)) + ln d/ln n)``;
    ``l`` = smallest integer with ``b*l >= ln d``."""
    if d < 2 or n < 2:
        raise InputError("need d >= 2 and n >= 2")
    if c_star < 0:
        raise InputError("c_star must be nonnegative")
    # rounding guards against ln(e^9)/ln(e^3) landing a hair below 3
    x = round(c_star * (max(0.0, math.log(d / k**2)) + math.log(d) / math.log(n)), 9)
    b = math.floor(x) + 1
    if b % 2 == 0:
        b += 1
    l = max(1, math.ceil(round(math.log(d) / b, 9)))
    return b, l


def _log_falling(x, m):
    """``ln(x (x-1) ... (x-m+1))``; ``-inf`` if a factor is nonpositive."""
    if m == 0:
        return 0.0
    if x - m + 1 <= 0:
        return -math.inf
    return float(gammaln(x + 1) - gammaln(x - m + 1))


def _log_comb(a, b):
    return float(gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1))


def kappa(n, k, beta, b, l, count="paper"):
    """Natural log of the normalization making ``P_{j0 jl}`` estimate ``v0(j0) v0(jl)``.

    ``kappa = N_int * prod_{i<l} C(n - i b, b) * (beta/k)^{b l} * k`` where
    ``N_int`` counts the ordered interior circles.  ``count="paper"`` uses
    ``N_int = k (k-1) ... (k-l+2)``; ``count="exact"`` uses
    ``(k-2)(k-3) ... (k-l)``, the number of interior sequences inside the
    support once ``j0`` and ``jl`` are in it, which makes the estimate
    exactly unbiased.
    """
    if n < b * l:
        raise InputError(f"need n >= b*l, got n={n}, b*l={b * l}")
    if beta <= 0:
        raise InputError("kappa vanishes for beta <= 0")
    if count == "paper":
        if k < l - 1:
            raise InputError("need k >= l - 1")
        ln_int = _log_falling(k, l - 1)
    elif count == "exact":
        ln_int = _log_falling(k - 2, l - 1)
    else:
        raise InputError(f"unknown count {count!r}")
    if not math.isfinite(ln_int):
        raise InputError(f"no interior circle sequence fits in a support of size k={k} for l={l}")
    ln_boxes = sum(_log_comb(n - i * b, b) for i in range(l))
    return ln_int + ln_boxes + b * l * math.log(beta / k) + math.log(k)


def path_graph_count(n, d, b, l):
    """Number of path graphs between two fixed distinct circles."""
    return math.perm(d - 2, l - 1) * math.prod(math.comb(n - i * b, b) for i in range(l))


def _check_pair(Y, j0, jl, b, l):
    Y = as_matrix(Y, "Y")
    n, d = Y.shape
    if not (0 <= j0 < d and 0 <= jl < d) or j0 == jl:
        raise InputError("j0 and jl must be distinct column indices")
    if n < b * l:
        raise InputError(f"need n >= b*l, got n={n}, b*l={b * l}")
    if d < l + 1:
        raise InputError(f"need d >= l+1 distinct circles, got d={d}")
    return Y


def path_graph_sum(Y, j0, jl, b, l):
    """Exact ``sum_alpha Y^alpha`` by enumerating every path graph."""
    Y = _check_pair(Y, j0, jl, b, l)
    n, d = Y.shape
    size = path_graph_count(n, d, b, l)
    if size > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"{size} path graphs exceed the enumeration guard {BRUTE_FORCE_LIMIT}")
    others = [j for j in range(d) if j not in (j0, jl)]

    def box_sets(step, free, factors):
        # yields the product of box contributions for all disjoint choices
        if step == l:
            yield 1.0
            return
        g = factors[step]
        for B in itertools.combinations(free, b):
            val = math.prod(g[i] for i in B)
            rest = [i for i in free if i not in B]
            for tail in box_sets(step + 1, rest, factors):
                yield val * tail

    total = 0.0
    for interior in itertools.permutations(others, l - 1):
        circles = (j0, *interior, jl)
        factors = [Y[:, circles[s]] * Y[:, circles[s + 1]] for s in range(l)]
        total += math.fsum(box_sets(0, list(range(n)), factors))
    return total


def brute_force_P(Y, j0, jl, b, l, ln_kappa):
    """``P_{j0 jl}(Y) = (1/kappa) sum_alpha Y^alpha`` by exhaustive enumeration."""
    return path_graph_sum(Y, j0, jl, b, l) * math.exp(-ln_kappa)


def log_colorful_rescale(b, l):
    """``ln`` of the inverse probability that a fixed path graph is colorful."""
    m = b * l
    return (l + 1) * math.log(l + 1) + m * math.log(m) - float(gammaln(l + 2)) - float(gammaln(m + 1))


def colorful_sums(Y, circle_colors, box_colors, b, l, starts=None):
    """Sum of ``Y^alpha`` over colorful path graphs, for every (start, end) pair.

    ``circle_colors`` maps columns to ``{0..l}`` and ``box_colors`` rows to
    ``{0..b*l-1}``.  Returns a ``len(starts) x d`` array whose entry
    ``[s, j]`` is the colorful sum for ``j0 = starts[s]``, ``jl = j``.

    The dynamic program advances one step at a time.  A state is the pair
    (used circle colors, used box colors) and holds, for every start and
    current circle, the sum over colorful partial paths.  A step to a new
    circle ``j'`` picks an unused circle color for ``j'`` and a set ``N`` of
    ``b`` unused box colors, with weight ``prod_{m in N} G_m[j, j']`` where
    ``G_m = Y_m^T Y_m`` over the rows of color ``m``.  Distinct colors force
    distinct circles and distinct, disjoint boxes.
    """
    Y = as_matrix(Y, "Y")
    n, d = Y.shape
    m_colors = b * l
    if m_colors > MAX_BOX_COLORS:
        raise CapacityError(f"b*l={m_colors} exceeds the color-coding guard {MAX_BOX_COLORS}")
    a = np.asarray(circle_colors, dtype=np.int64)
    c = np.asarray(box_colors, dtype=np.int64)
    if a.shape != (d,) or c.shape != (n,):
        raise InputError("coloring sizes must match Y")
    if a.min(initial=0) < 0 or a.max(initial=0) > l or c.min(initial=0) < 0 or c.max(initial=0) >= m_colors:
        raise InputError("color out of range")
    starts = np.arange(d) if starts is None else np.asarray(starts, dtype=np.int64)

    G = []
    for m in range(m_colors):
        rows = Y[c == m]
        G.append(rows.T @ rows)
    circle_masks = [(a == q).astype(np.float64) for q in range(l + 1)]

    state = {}
    for q in range(l + 1):
        T = np.zeros((starts.size, d))
        sel = a[starts] == q
        T[np.flatnonzero(sel), starts[sel]] = 1.0
        if sel.any():
            state[(1 << q, 0)] = T

    full_box = (1 << m_colors) - 1
    for _ in range(l):
        nxt = {}
        for (used_c, used_m), T in state.items():
            free_m = [m for m in range(m_colors) if not (used_m >> m) & 1]
            free_c = [q for q in range(l + 1) if not (used_c >> q) & 1]
            for N in itertools.combinations(free_m, b):
                GN = G[N[0]]
                for m in N[1:]:
                    GN = GN * G[m]
                TG = T @ GN
                new_m = used_m | sum(1 << m for m in N)
                for q in free_c:
                    key = (used_c | (1 << q), new_m)
                    part = TG * circle_masks[q]
                    if key in nxt:
                        nxt[key] += part
                    else:
                        nxt[key] = part
        state = nxt
    out = np.zeros((starts.size, d))
    for (_, used_m), T in state.items():
        assert used_m == full_box
        out += T
    return out


def _random_coloring(n, d, b, l, rng):
    return rng.integers(0, l + 1, size=d), rng.integers(0, b * l, size=n)


def color_coded_matrix(Y, params, ln_kappa, starts=None):
    """Mean and sample std over colorings of the rescaled colorful estimates.

    Coloring ``t`` is drawn from a stream derived from ``(params.seed, t)``, so
    results do not depend on evaluation order.
    """
    Y = as_matrix(Y, "Y")
    n, d = Y.shape
    if n < params.b * params.l:
        raise InputError(f"need n >= b*l, got n={n}, b*l={params.b * params.l}")
    scale = math.exp(log_colorful_rescale(params.b, params.l) - ln_kappa)
    total = None
    total_sq = None
    for t in range(params.n_colorings):
        a, c = _random_coloring(n, d, params.b, params.l, stream(params.seed, t))
        p = scale * colorful_sums(Y, a, c, params.b, params.l, starts)
        if total is None:
            total = p.copy()
            total_sq = p * p
        else:
            total += p
            total_sq += p * p
    N = params.n_colorings
    mean = total / N
    var = np.maximum(total_sq / N - mean * mean, 0.0) * (N / (N - 1) if N > 1 else 0.0)
    return mean, np.sqrt(var)


@dataclass(frozen=True)
class ColorCodedValue:
    value: float
    std: float
    n_colorings: int

    @property
    def stderr(self):
        return self.std / math.sqrt(self.n_colorings)

    def __float__(self):
        return self.value


def color_coded_P(Y, j0, jl, params, ln_kappa, rng=None):
    """Color-coding estimate of ``P_{j0 jl}(Y)``.

    ``rng`` (an integer seed) overrides ``params.seed``.  The returned value
    converts to ``float`` and also carries the sample std over colorings.
    """
    Y = _check_pair(Y, j0, jl, params.b, params.l)
    if rng is not None:
        params = ColorCodingParams(params.b, params.l, params.n_colorings, params.c_star, int(rng))
    mean, std = color_coded_matrix(Y, params, ln_kappa, starts=[j0])
    return ColorCodedValue(float(mean[0, jl]), float(std[0, jl]), params.n_colorings)


def poly_estimator(Y, k, beta, params=None, rng=None, brute_force=False, count="paper"):
    """Top eigenvector of the symmetric, zero-diagonal matrix of ``P_{j j'}`` values.

    ``rng``, when given, is an integer seed that overrides ``params.seed``.
    """
    t0 = time.perf_counter()
    Y = as_matrix(Y, "Y")
    n, d = Y.shape
    if params is None:
        b, l = choose_poly_params(n, d, k)
        params = ColorCodingParams(b, l)
    if rng is not None:
        params = ColorCodingParams(params.b, params.l, params.n_colorings, params.c_star, int(rng))
    ln_k = kappa(n, k, beta, params.b, params.l, count)
    if brute_force:
        P = np.zeros((d, d))
        for j in range(d):
            for jp in range(j + 1, d):
                P[j, jp] = P[jp, j] = brute_force_P(Y, j, jp, params.b, params.l, ln_k)
        std = None
    else:
        P, std = color_coded_matrix(Y, params, ln_k)
        P = 0.5 * (P + P.T)
    np.fill_diagonal(P, 0.0)
    eig = top_eigenvector(P)
    diag = {
        "eigenvalue": eig.value,
        "iterations": eig.iterations,
        "wall_ms": 1e3 * (time.perf_counter() - t0),
        "max_std": None if std is None else float(std.max()),
    }
    return Estimate(eig.vector, "poly", asdict(params), diag)
