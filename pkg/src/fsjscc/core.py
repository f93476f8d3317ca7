"""Finite alphabets, sequences, empirical block statistics and information measures.

All logarithms are base 2. Symbols are dense integer indices; labels are only
used when reading or writing files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError, EmptyInputError, ValidationError

PMF_TOL = 1e-12
INPUT_TOL = 1e-9


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValidationError(f"alphabet size must be >= 1, got {self.size}")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValidationError("number of labels must equal alphabet size")
            if len(set(labels)) != len(labels):
                raise ValidationError("alphabet labels must be unique")
            object.__setattr__(self, "labels", labels)

    def index(self, label: str) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label)


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    """A finite-alphabet deterministic sequence stored as symbol indices."""

    alphabet: Alphabet
    symbols: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int64).ravel()
        if s.size and (s.min() < 0 or s.max() >= self.alphabet.size):
            raise ValidationError(
                f"symbol index out of range for alphabet of size {self.alphabet.size}"
            )
        object.__setattr__(self, "symbols", _frozen(s))

    @classmethod
    def from_list(cls, symbols: Sequence[int], size: int | None = None) -> "SymbolSequence":
        s = np.asarray(symbols, dtype=np.int64)
        if size is None:
            size = int(s.max()) + 1 if s.size else 1
        return cls(Alphabet(size), s)

    @classmethod
    def from_string(cls, text: str, size: int = 2) -> "SymbolSequence":
        """Digits-only shorthand, e.g. ``SymbolSequence.from_string("0101")``."""
        return cls(Alphabet(size), [int(ch) for ch in text])

    def __len__(self):
        return int(self.symbols.size)

    @property
    def length(self) -> int:
        return len(self)

    def __eq__(self, other):
        return (
            isinstance(other, SymbolSequence)
            and self.alphabet.size == other.alphabet.size
            and np.array_equal(self.symbols, other.symbols)
        )

    def __hash__(self):
        return hash((self.alphabet.size, self.symbols.tobytes()))


@dataclass(frozen=True, eq=False)
class FinitePmf:
    """Probability mass function on ``{0, ..., m-1}``.

    ``meta`` carries bookkeeping such as the number of truncated symbols when a
    sequence length is not a multiple of the block length.
    """

    p: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = _check_pmf(np.asarray(self.p, dtype=float).ravel())
        object.__setattr__(self, "p", _frozen(p))

    @classmethod
    def uniform(cls, m: int) -> "FinitePmf":
        return cls(np.full(m, 1.0 / m))

    @property
    def size(self) -> int:
        return int(self.p.size)

    def entropy(self) -> float:
        return entropy(self.p)

    def __getitem__(self, i):
        return self.p[i]


@dataclass(frozen=True, eq=False)
class JointPmf:
    """PMF over a product of finite alphabets, one array axis per component."""

    p: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim < 1:
            raise ValidationError("joint PMF needs at least one component")
        p = _check_pmf(p)
        object.__setattr__(self, "p", _frozen(p))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(self.p.shape)

    @property
    def ncomponents(self) -> int:
        return self.p.ndim

    def marginal(self, axes) -> "JointPmf":
        axes = _as_axes(axes)
        drop = tuple(i for i in range(self.p.ndim) if i not in axes)
        m = self.p.sum(axis=drop)
        # restore requested order
        kept = [i for i in range(self.p.ndim) if i in axes]
        m = np.moveaxis(m, list(range(len(kept))), [axes.index(k) for k in kept])
        return JointPmf(m)

    def entropy(self, axes=None) -> float:
        if axes is None:
            return entropy(self.p)
        return entropy(self.marginal(axes).p)

    def conditional_entropy(self, of, given=()) -> float:
        of, given = _as_axes(of), _as_axes(given)
        if not given:
            return self.entropy(of)
        return self.entropy(of + given) - self.entropy(given)

    def mutual_information(self, a, b, given=()) -> float:
        """I(A;B|C) in bits, clipped at zero against rounding."""
        a, b, c = _as_axes(a), _as_axes(b), _as_axes(given)
        h = lambda ax: self.entropy(ax) if ax else 0.0
        val = h(a + c) + h(b + c) - h(a + b + c) - h(c)
        return max(val, 0.0)


def _as_axes(axes) -> tuple[int, ...]:
    if isinstance(axes, (int, np.integer)):
        return (int(axes),)
    return tuple(int(a) for a in axes)


def _check_pmf(p: np.ndarray) -> np.ndarray:
    # inputs may carry accumulated rounding; stored PMFs are renormalized
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError("PMF entries must be finite and nonnegative")
    total = p.sum()
    if abs(total - 1.0) > INPUT_TOL:
        raise ValidationError(f"PMF must sum to 1 (sum={total!r})")
    return p / total


def normalize(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p / p.sum()


# ---------------------------------------------------------------------------
# channels and distortion tables


@dataclass(frozen=True, eq=False)
class Dmc:
    """Discrete memoryless channel ``P[x, y] = P(y|x)``."""

    P: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        if P.ndim != 2:
            raise ValidationError("channel matrix must be 2-D")
        if np.any(P < 0) or np.any(P > 1 + 1e-15) or not np.all(np.isfinite(P)):
            raise ValidationError("channel entries must lie in [0, 1]")
        if np.any(np.abs(P.sum(axis=1) - 1.0) > INPUT_TOL):
            raise ValidationError("channel rows must sum to 1")
        P = P / P.sum(axis=1, keepdims=True)
        object.__setattr__(self, "P", _frozen(P))

    @property
    def nin(self) -> int:
        return self.P.shape[0]

    @property
    def nout(self) -> int:
        return self.P.shape[1]

    @classmethod
    def bsc(cls, p: float) -> "Dmc":
        return cls([[1 - p, p], [p, 1 - p]])

    @classmethod
    def noiseless(cls, k: int = 2) -> "Dmc":
        return cls(np.eye(k))

    @classmethod
    def constant(cls, nin: int, row) -> "Dmc":
        """Channel whose output ignores the input (all rows equal ``row``)."""
        return cls(np.tile(normalize(row), (nin, 1)))

    def power(self, ell: int) -> "Dmc":
        """Memoryless extension to ``ell``-blocks (first symbol most significant)."""
        P = np.ones((1, 1))
        for _ in range(ell):
            P = np.kron(P, self.P)
        return Dmc(P)

    def is_input_independent(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.P - self.P[0]) <= tol))


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """Single-letter distortion table ``rho[u, v]``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.table, dtype=float))
        if t.ndim != 2 or not np.all(np.isfinite(t)) or np.any(t < 0):
            raise ValidationError("distortion table must be a finite nonnegative matrix")
        object.__setattr__(self, "table", _frozen(t))

    @property
    def rho_max(self) -> float:
        return float(self.table.max())

    @property
    def shape(self):
        return self.table.shape

    @classmethod
    def hamming(cls, k: int = 2, kv: int | None = None) -> "DistortionMeasure":
        kv = k if kv is None else kv
        return cls(1.0 - np.eye(k, kv))

    def block(self, ell: int) -> "DistortionMeasure":
        """Additive extension to ``ell``-blocks, indexed like :func:`block_indices`."""
        t = self.table
        out = np.zeros((1, 1))
        for _ in range(ell):
            out = (out[:, None, :, None] + t[None, :, None, :]).reshape(
                out.shape[0] * t.shape[0], out.shape[1] * t.shape[1]
            )
        return DistortionMeasure(out)


# ---------------------------------------------------------------------------
# empirical statistics


def block_indices(seq: SymbolSequence, ell: int) -> np.ndarray:
    """Superalphabet index of each complete non-overlapping ``ell``-block.

    The first symbol of a block is the most significant digit. Any trailing
    remainder shorter than ``ell`` is dropped.
    """
    if ell < 1:
        raise ValidationError("block length must be >= 1")
    n = len(seq)
    if ell > n:
        raise EmptyInputError(f"block length {ell} exceeds sequence length {n}")
    nb = n // ell
    blocks = seq.symbols[: nb * ell].reshape(nb, ell)
    weights = seq.alphabet.size ** np.arange(ell - 1, -1, -1, dtype=np.int64)
    return blocks @ weights


def block_empirical(seq: SymbolSequence, ell: int) -> FinitePmf:
    """Empirical PMF of the non-overlapping ``ell``-blocks of ``seq``."""
    idx = block_indices(seq, ell)
    counts = np.bincount(idx, minlength=seq.alphabet.size**ell)
    meta = {"ell": ell, "blocks": int(idx.size), "truncated": len(seq) - idx.size * ell}
    return FinitePmf(counts / idx.size, meta=meta)


def joint_block_empirical(seqs: Sequence[SymbolSequence], ell: int) -> JointPmf:
    """Joint empirical PMF of aligned ``ell``-blocks; one axis per sequence."""
    if not seqs:
        raise ValidationError("need at least one sequence")
    n = len(seqs[0])
    if any(len(s) != n for s in seqs):
        raise AlignmentError("all sequences must have the same length")
    idx = [block_indices(s, ell) for s in seqs]
    shape = tuple(s.alphabet.size**ell for s in seqs)
    flat = np.ravel_multi_index(idx, shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    nb = idx[0].size
    return JointPmf(counts / nb, meta={"ell": ell, "blocks": nb, "truncated": n - nb * ell})


def average_distortion(u: SymbolSequence, v: SymbolSequence, rho: DistortionMeasure) -> float:
    if len(u) != len(v):
        raise AlignmentError("source and reconstruction lengths differ")
    return float(np.mean(rho.table[u.symbols, v.symbols]))


# ---------------------------------------------------------------------------
# information measures (bits)


def entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(x: float) -> float:
    if x <= 0 or x >= 1:
        return 0.0
    return float(-x * math.log2(x) - (1 - x) * math.log2(1 - x))


def divergence(q, p) -> float:
    """D(q||p) in bits; ``inf`` when q is not absolutely continuous w.r.t. p."""
    q = np.asarray(q, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    s = q > 0
    if np.any(p[s] <= 0):
        return math.inf
    return float(max((q[s] * np.log2(q[s] / p[s])).sum(), 0.0))


def mutual_information(joint) -> float:
    """I(X;Y) of a 2-D joint array."""
    j = np.asarray(joint.p if isinstance(joint, JointPmf) else joint, dtype=float)
    return JointPmf(j).mutual_information(0, 1)


def channel_mutual_information(prior, W) -> float:
    """I(X;Y) for input PMF ``prior`` through channel matrix ``W``."""
    prior = np.asarray(prior, dtype=float)
    W = np.asarray(W.P if isinstance(W, Dmc) else W, dtype=float)
    q = prior @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(W > 0, W * np.log2(W / q), 0.0)
    return float(max(prior @ t.sum(axis=1), 0.0))


def conditional_divergence(q: Dmc, p: Dmc, prior: FinitePmf | np.ndarray) -> float:
    """D(q||p|prior) = sum_x prior(x) D(q(.|x) || p(.|x)); ``inf`` if unbounded."""
    Q = q.P if isinstance(q, Dmc) else np.asarray(q, dtype=float)
    P = p.P if isinstance(p, Dmc) else np.asarray(p, dtype=float)
    w = prior.p if isinstance(prior, FinitePmf) else np.asarray(prior, dtype=float)
    if Q.shape != P.shape or Q.shape[0] != w.size:
        raise ValidationError("channel and prior shapes do not match")
    total = 0.0
    for x in np.flatnonzero(w > 0):
        d = divergence(Q[x], P[x])
        if math.isinf(d):
            return math.inf
        total += w[x] * d
    return float(total)
