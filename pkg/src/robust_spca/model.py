"""Instance generators for the spiked Wishart and planted-subspace models, and
the binary ``SPCA1`` instance format."""

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .adversary import (
    MomentMatching,
    adversary_tag,
    build_moment_distribution,
    build_perturbation,
    moment_perturbation,
)
from .errors import DegenerateInputError, FormatError, InputError
from .rng import make_rng

WISHART = "wishart"
SUBSPACE = "subspace"
_FORM_TAGS = {WISHART: 0, SUBSPACE: 1}
_TAG_FORMS = {v: k for k, v in _FORM_TAGS.items()}

MAGIC = b"SPCA1\0"
VERSION = 1
_HEADER = struct.Struct("<6sBBIIIddIB")


@dataclass(frozen=True)
class ModelParams:
    n: int
    d: int
    k: int
    beta: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise InputError("n and d must be positive")
        if not 1 <= self.k <= self.d:
            raise InputError(f"k must lie in [1, d={self.d}], got {self.k}")
        if self.beta < 0:
            raise InputError("beta must be nonnegative")


@dataclass(frozen=True)
class Truth:
    v0: np.ndarray
    u0: np.ndarray
    W: np.ndarray
    E: np.ndarray


@dataclass(frozen=True)
class Instance:
    Y: np.ndarray
    truth: Truth = None
    form: str = WISHART
    params: ModelParams = None
    adversary: object = None
    lam: float = 0.0
    delta: float = 0.0
    s: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def d(self):
        return self.Y.shape[1]

    @property
    def k(self):
        return self.params.k

    def planted_row(self):
        """For subspace instances: ``(u, v)`` with ``u^T Y = v^T`` and ``v = lam*v_tilde + v'``."""
        if self.form != SUBSPACE or self.truth is None:
            raise InputError("planted_row needs a subspace instance with truth")
        u = self.truth.u0 / math.sqrt(self.n)
        v_prime = u @ (self.truth.W + self.truth.E)
        v_tilde = self.truth.v0 * math.sqrt(self.k)
        return u, self.lam * v_tilde + v_prime


def sample_flat_sparse_vector(d, k, rng, mode="flat"):
    """Unit vector with a uniformly random ``k``-subset support.

    In ``"flat"`` mode the nonzeros are independent ``+-1/sqrt(k)``; in
    ``"general"`` mode they are Gaussian and the vector is renormalized.
    """
    if not 1 <= k <= d:
        raise InputError(f"k must lie in [1, d={d}], got {k}")
    rng = make_rng(rng)
    support = np.sort(rng.choice(d, size=k, replace=False))
    v = np.zeros(d)
    if mode == "flat":
        v[support] = np.where(rng.random(k) < 0.5, -1.0, 1.0) / math.sqrt(k)
    elif mode == "general":
        g = rng.standard_normal(k)
        while not np.any(g):
            g = rng.standard_normal(k)
        v[support] = g / np.linalg.norm(g)
    else:
        raise InputError(f"unknown signal mode {mode!r}")
    return v


def sample_wishart_instance(params, adversary=None, rng=None, signal_mode="flat"):
    """``Y = sqrt(beta) u0 v0^T + W + E`` with ``E`` built by ``adversary``."""
    rng = make_rng(params.seed if rng is None else rng)
    n, d = params.n, params.d
    v0 = sample_flat_sparse_vector(d, params.k, rng, signal_mode)
    u0 = rng.standard_normal(n)
    W = rng.standard_normal((n, d))
    E = build_perturbation(adversary, W, u0, v0, params.beta, rng)
    Y = math.sqrt(params.beta) * np.outer(u0, v0) + W + E
    return Instance(Y, Truth(v0, u0, W, E), WISHART, params, adversary)


def sample_subspace_instance(n, d, lam, delta, s_mode="auto", rng=None, dist=None, max_resample=100):
    """Planted almost-Gaussian row in a random subspace.

    ``Y = u (lam v_tilde + v')^T + (I - u u^T) W``, with ``u`` uniform on
    ``{+-1/sqrt(n)}^n``, ``v_tilde`` i.i.d. in ``{0, +-1}``, and ``v'`` drawn
    from the moment-matching law off the support of ``v_tilde``.
    """
    if lam < 0:
        raise InputError("lambda must be nonnegative")
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    rng = make_rng(0 if rng is None else rng)
    if dist is None:
        dist = build_moment_distribution(lam, delta, s_mode)
    for _ in range(max_resample):
        r = rng.random(d)
        v_tilde = np.where(r < delta / 2, -1.0, np.where(r < delta, 1.0, 0.0))
        if np.any(v_tilde):
            break
    else:
        raise DegenerateInputError(f"v_tilde was zero in {max_resample} draws")
    u = np.where(rng.random(n) < 0.5, -1.0, 1.0) / math.sqrt(n)
    W = rng.standard_normal((n, d))
    E, _ = moment_perturbation(W, u, v_tilde, dist, rng)
    Y = lam * np.outer(u, v_tilde) + W + E
    k = int(np.count_nonzero(v_tilde))
    v0 = v_tilde / math.sqrt(k)
    u0 = math.sqrt(n) * u
    params = ModelParams(n, d, k, lam**2 * k / n)
    spec = MomentMatching(lam, delta, dist.s)
    return Instance(Y, Truth(v0, u0, W, E), SUBSPACE, params, spec, lam, delta, dist.s)


# --------------------------------------------------------------------------
# SPCA1 binary format


def save_instance(inst, path):
    n, d = inst.Y.shape
    has_truth = inst.truth is not None
    scalar = inst.lam if inst.form == SUBSPACE else inst.params.beta
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        _FORM_TAGS[inst.form],
        n,
        d,
        inst.params.k,
        float(scalar),
        float(inst.delta),
        int(inst.s),
        1 if has_truth else 0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(inst.Y, dtype="<f8").tobytes())
        if has_truth:
            for arr in (inst.truth.v0, inst.truth.u0, inst.truth.W, inst.truth.E):
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_block(buf, offset, count, shape):
    nbytes = 8 * count
    if offset + nbytes > len(buf):
        raise FormatError("file truncated")
    arr = np.frombuffer(buf, dtype="<f8", count=count, offset=offset).astype(np.float64)
    return arr.reshape(shape), offset + nbytes


def load_instance(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _HEADER.size:
        raise FormatError("file truncated in header")
    magic, version, tag, n, d, k, scalar, delta, s, flag = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError("bad magic; not an SPCA1 file")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if tag not in _TAG_FORMS:
        raise FormatError(f"unknown form tag {tag}")
    if flag not in (0, 1):
        raise FormatError(f"bad truth flag {flag}")
    form = _TAG_FORMS[tag]
    off = _HEADER.size
    Y, off = _read_block(buf, off, n * d, (n, d))
    truth = None
    if flag:
        v0, off = _read_block(buf, off, d, (d,))
        u0, off = _read_block(buf, off, n, (n,))
        W, off = _read_block(buf, off, n * d, (n, d))
        E, off = _read_block(buf, off, n * d, (n, d))
        truth = Truth(v0, u0, W, E)
    if off != len(buf):
        raise FormatError("trailing bytes after payload")
    if form == SUBSPACE:
        params = ModelParams(n, d, k, scalar**2 * k / n)
        spec = MomentMatching(scalar, delta, s) if 0 < delta < 1 else None
        return Instance(Y, truth, form, params, spec, scalar, delta, s)
    return Instance(Y, truth, form, ModelParams(n, d, k, scalar), None)


def describe(inst):
    """Short provenance dictionary used by the CLI."""
    return {
        "form": inst.form,
        "n": inst.n,
        "d": inst.d,
        "k": inst.params.k,
        "beta": inst.params.beta,
        "lambda": inst.lam,
        "delta": inst.delta,
        "s": inst.s,
        "adversary": adversary_tag(inst.adversary),
        "truth": inst.truth is not None,
    }
