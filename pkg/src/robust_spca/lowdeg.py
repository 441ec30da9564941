"""Low-degree diagnostics for the sparse spiked model.

Planted law: ``Y = sqrt(beta) u v^T + W`` with i.i.d. symmetric ``u_i`` and
i.i.d. ``v_j`` equal to ``+-1/sqrt(k)`` with probability ``k/(2d)`` each and
0 otherwise.  Hermite polynomials are scaled as ``H_l = He_l / l!`` so that
``E H_l(w + c) = c^l / l!`` for standard normal ``w``; on multilinear indices
``H_alpha(Y) = prod Y_ij``, an orthonormal family under the null.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate

from .errors import CapacityError, InputError
from .rng import make_rng

EXACT_MAX_CELLS = 16
EXACT_MAX_DEGREE = 6


class MultiIndex:
    """Multiset of (row, column) edges of a bipartite multigraph."""

    __slots__ = ("_items",)

    def __init__(self, mapping):
        items = {}
        for (i, j), m in dict(mapping).items():
            m = int(m)
            if m < 1:
                raise InputError("multiplicities must be >= 1")
            items[(int(i), int(j))] = m
        if not items:
            raise InputError("a multi-index must be nonempty")
        self._items = dict(sorted(items.items()))

    @classmethod
    def from_edges(cls, edges):
        out = {}
        for e in edges:
            out[e] = out.get(e, 0) + 1
        return cls(out)

    def items(self):
        return self._items.items()

    @property
    def size(self):
        return sum(self._items.values())

    def row_degrees(self):
        deg = {}
        for (i, _), m in self._items.items():
            deg[i] = deg.get(i, 0) + m
        return deg

    def col_degrees(self):
        deg = {}
        for (_, j), m in self._items.items():
            deg[j] = deg.get(j, 0) + m
        return deg

    @property
    def factorial(self):
        return math.prod(math.factorial(m) for m in self._items.values())

    @property
    def multilinear(self):
        return all(m == 1 for m in self._items.values())

    @property
    def all_even(self):
        return all(x % 2 == 0 for x in (*self.row_degrees().values(), *self.col_degrees().values()))

    def __eq__(self, other):
        return isinstance(other, MultiIndex) and self._items == other._items

    def __hash__(self):
        return hash(tuple(self._items.items()))

    def __repr__(self):
        return f"MultiIndex({self._items})"


@dataclass(frozen=True)
class UMomentSpec:
    """Law of the planted ``u_i``: ``gaussian``, ``rademacher`` or ``truncated_gaussian``.

    The truncated law is a standard normal conditioned on ``|u| <= R`` and then
    rescaled to unit variance, so ``E u^2 = 1`` in every mode.
    """

    mode: str = "gaussian"
    R: float = None

    def __post_init__(self):
        if self.mode not in ("gaussian", "rademacher", "truncated_gaussian"):
            raise InputError(f"unknown u mode {self.mode!r}")
        if self.mode == "truncated_gaussian" and (self.R is None or self.R < 1):
            raise InputError("truncated_gaussian needs R >= 1")

    def _raw_truncated(self, r):
        R = self.R
        z = math.erf(R / math.sqrt(2))
        val, _ = integrate.quad(
            lambda x: x**r * math.exp(-x * x / 2), -R, R, epsabs=1e-13, epsrel=1e-12, limit=200
        )
        return val / (math.sqrt(2 * math.pi) * z)

    @cached_property
    def _scale(self):
        return 1.0 / math.sqrt(self._raw_truncated(2))

    def moment(self, r):
        if r < 0:
            raise InputError("moment order must be nonnegative")
        if r % 2:
            return 0.0
        if self.mode == "gaussian":
            return float(math.prod(range(r - 1, 0, -2)))
        if self.mode == "rademacher":
            return 1.0
        return self._raw_truncated(r) * self._scale**r

    def sample(self, size, rng):
        rng = make_rng(rng)
        if self.mode == "gaussian":
            return rng.standard_normal(size)
        if self.mode == "rademacher":
            return np.where(rng.random(size) < 0.5, -1.0, 1.0)
        out = rng.standard_normal(size)
        bad = np.abs(out) > self.R
        while bad.any():
            out[bad] = rng.standard_normal(int(bad.sum()))
            bad = np.abs(out) > self.R
        return out * self._scale


GAUSSIAN = UMomentSpec()


def hermite_expectation_planted(alpha, n, d, k, beta, u_spec=GAUSSIAN):
    """Exact ``E H_alpha(Y)`` under the planted law; 0 if any vertex has odd degree."""
    if not isinstance(alpha, MultiIndex):
        alpha = MultiIndex(alpha)
    if not alpha.all_even:
        return 0.0
    rows = alpha.row_degrees()
    cols = alpha.col_degrees()
    if max(rows) >= n or min(rows) < 0 or max(cols) >= d or min(cols) < 0:
        raise InputError("multi-index outside the n x d grid")
    u_factor = math.prod(u_spec.moment(deg) for deg in rows.values())
    return (beta / k) ** (alpha.size / 2) * (k / d) ** len(cols) * u_factor / alpha.factorial


def even_multilinear_subgraphs(n, d, D):
    """All nonempty edge subsets of ``K_{n,d}`` with at most ``D`` edges and every degree even.

    Edges are included row by row; once a row is finished its degree must be
    even, and after the last row every column degree must be even.
    """
    out = []
    row_deg = [0] * n
    col_deg = [0] * d
    chosen = []

    def rec(i, j):
        if j == d:
            if row_deg[i] % 2:
                return
            i, j = i + 1, 0
            if i == n:
                if chosen and not any(x % 2 for x in col_deg):
                    out.append(MultiIndex.from_edges(chosen))
                return
        # exclude edge (i, j)
        rec(i, j + 1)
        if len(chosen) < D:
            chosen.append((i, j))
            row_deg[i] += 1
            col_deg[j] += 1
            rec(i, j + 1)
            chosen.pop()
            row_deg[i] -= 1
            col_deg[j] -= 1

    rec(0, 0)
    return out


def chi2_multilinear_exact(n, d, k, beta, D, u_spec=GAUSSIAN):
    """``sum (E H_alpha)^2`` over multilinear ``alpha`` with ``0 < |alpha| <= D``."""
    if n * d > EXACT_MAX_CELLS or D > EXACT_MAX_DEGREE:
        raise CapacityError(f"exact enumeration limited to n*d <= {EXACT_MAX_CELLS}, D <= {EXACT_MAX_DEGREE}")
    return math.fsum(
        hermite_expectation_planted(a, n, d, k, beta, u_spec) ** 2 for a in even_multilinear_subgraphs(n, d, D)
    )


def _bound_term(n, d, k, beta, E):
    denom = min(math.sqrt(d / n), k / math.sqrt(E * n) * (abs(math.log(d * E / k**2)) + 1))
    return (120 * beta / denom) ** E


def chi2_bound_spiked(n, d, k, beta, D):
    """``sum_{E=2..D} (120 beta / min(sqrt(d/n), k/sqrt(E n) * (|ln(d E / k^2)| + 1)))^E``."""
    return math.fsum(t for _, t in chi2_bound_terms(n, d, k, beta, D))


def chi2_bound_terms(n, d, k, beta, D):
    """Per-degree ``(E, term)`` pairs of :func:`chi2_bound_spiked`."""
    if min(n, d, k) <= 0 or beta < 0:
        raise InputError("n, d, k must be positive and beta nonnegative")
    return [(E, _bound_term(n, d, k, beta, E)) for E in range(2, int(D) + 1)]


def planted_sampler(n, d, k, beta, u_spec=GAUSSIAN):
    """Return ``sample(rng, size) -> (size, n, d)`` drawing from the planted law."""
    if not 0 < k <= d:
        raise InputError("need 0 < k <= d")

    def sample(rng, size):
        rng = make_rng(rng)
        u = u_spec.sample((size, n), rng)
        r = rng.random((size, d))
        p = k / (2 * d)
        v = np.where(r < p, -1.0, np.where(r < 2 * p, 1.0, 0.0)) / math.sqrt(k)
        W = rng.standard_normal((size, n, d))
        return W + math.sqrt(beta) * u[:, :, None] * v[:, None, :]

    return sample


def null_sampler(n, d):
    def sample(rng, size):
        return make_rng(rng).standard_normal((size, n, d))

    return sample


def hermite_values(alpha, Y):
    """``H_alpha`` evaluated on a batch ``Y`` of shape ``(N, n, d)``."""
    out = np.ones(Y.shape[0])
    for (i, j), m in alpha.items():
        coef = np.zeros(m + 1)
        coef[m] = 1.0 / math.factorial(m)
        out *= hermite_e.hermeval(Y[:, i, j], coef)
    return out


def mc_hermite_expectation(alpha, sampler, N, rng, batch=100_000):
    """Monte-Carlo mean of ``H_alpha`` with its standard error."""
    if N < 100:
        raise InputError("N must be at least 100")
    if not isinstance(alpha, MultiIndex):
        alpha = MultiIndex(alpha)
    rng = make_rng(rng)
    s = s2 = 0.0
    done = 0
    while done < N:
        m = min(batch, N - done)
        h = hermite_values(alpha, sampler(rng, m))
        s += float(h.sum())
        s2 += float((h * h).sum())
        done += m
    mean = s / N
    var = max(s2 / N - mean * mean, 0.0) * N / (N - 1)
    return mean, math.sqrt(var / N)


def even_multi_indices(n, d, max_size):
    """All multi-indices on the ``n x d`` grid with ``|alpha| <= max_size`` and even degrees."""
    cells = [(i, j) for i in range(n) for j in range(d)]
    out = []

    def rec(pos, remaining, current):
        if pos == len(cells):
            if current:
                a = MultiIndex(current)
                if a.all_even:
                    out.append(a)
            return
        rec(pos + 1, remaining, current)
        for m in range(1, remaining + 1):
            current[cells[pos]] = m
            rec(pos + 1, remaining - m, current)
            del current[cells[pos]]

    rec(0, max_size, {})
    return out
