"""Incremental (LZ78) parsing, conditional LZ complexity and the max-entropy pair Phi/Psi.

Phi(D) is the largest entropy of a PMF on Z_alpha whose mean difference
distortion is at most D, and Psi is its inverse. Together with the conditional
LZ complexity they give a lower bound on the expected distortion that needs no
block statistics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import SymbolSequence
from .errors import AlignmentError, EmptyInputError, ValidationError
from .report import ASYMPTOTIC_FLAG, BoundReport

__all__ = [
    "LzParse",
    "JointParse",
    "DifferenceDistortion",
    "lz78_parse",
    "lz_complexity",
    "joint_parse",
    "conditional_lz_complexity",
    "phi",
    "psi",
    "psi_dual",
    "two_sided_si_bound",
]


def _symbols(seq) -> np.ndarray:
    if isinstance(seq, SymbolSequence):
        return seq.symbols
    return np.asarray(seq, dtype=np.int64)


@dataclass(frozen=True)
class LzParse:
    phrases: tuple
    final_incomplete: bool

    @property
    def c(self) -> int:
        return len(self.phrases)


def lz78_parse(seq) -> LzParse:
    """Split ``seq`` into phrases, each the shortest prefix not seen as a phrase before.

    A trailing prefix that is already in the dictionary is kept as a last
    phrase and flagged.
    """
    s = _symbols(seq).tolist()
    if not s:
        raise EmptyInputError("cannot parse an empty sequence")
    trie: dict = {}
    phrases = []
    node, start = 0, 0
    nxt = 1
    for i, a in enumerate(s):
        child = trie.get((node, a))
        if child is None:
            trie[(node, a)] = nxt
            nxt += 1
            phrases.append(tuple(s[start:i + 1]))
            node, start = 0, i + 1
        else:
            node = child
    tail = start < len(s)
    if tail:
        phrases.append(tuple(s[start:]))
    return LzParse(tuple(phrases), tail)


def lz_complexity(seq) -> float:
    """(c log2 c) / n for the LZ78 phrase count c."""
    c = lz78_parse(seq).c
    return c * math.log2(c) / len(_symbols(seq)) if c > 1 else 0.0


@dataclass(frozen=True)
class JointParse:
    """Incremental parsing of the pair sequence ((u_i, w_i)).

    ``w_phrases`` lists the distinct w-parts in order of first appearance,
    ``phrase_counts[j]`` is the number of phrases whose w-part is the j-th one
    and ``counts[j]`` the number of distinct u-parts among them.
    """

    phrases: tuple
    w_phrases: tuple
    phrase_counts: tuple
    counts: tuple
    n: int
    final_incomplete: bool = False

    @property
    def c_total(self) -> int:
        return len(self.phrases)

    @property
    def c_w(self) -> int:
        return len(self.w_phrases)

    def histogram(self) -> dict:
        h: dict = {}
        for c in self.counts:
            h[c] = h.get(c, 0) + 1
        return dict(sorted(h.items()))


def joint_parse(u, w) -> JointParse:
    us, ws = _symbols(u).tolist(), _symbols(w).tolist()
    if len(us) != len(ws):
        raise AlignmentError(f"sequence lengths differ: {len(us)} vs {len(ws)}")
    if not us:
        raise EmptyInputError("cannot parse empty sequences")
    trie: dict = {}
    phrases = []
    node, start, nxt = 0, 0, 1
    for i, pair in enumerate(zip(us, ws)):
        child = trie.get((node, pair))
        if child is None:
            trie[(node, pair)] = nxt
            nxt += 1
            phrases.append((tuple(us[start:i + 1]), tuple(ws[start:i + 1])))
            node, start = 0, i + 1
        else:
            node = child
    tail = start < len(us)
    if tail:
        phrases.append((tuple(us[start:]), tuple(ws[start:])))
    index: dict = {}
    uparts: list = []
    nph: list = []
    for up, wp in phrases:
        j = index.get(wp)
        if j is None:
            j = index[wp] = len(uparts)
            uparts.append(set())
            nph.append(0)
        uparts[j].add(up)
        nph[j] += 1
    return JointParse(
        phrases=tuple(phrases),
        w_phrases=tuple(index),
        phrase_counts=tuple(nph),
        counts=tuple(len(x) for x in uparts),
        n=len(us),
        final_incomplete=tail,
    )


def conditional_lz_complexity(u, w, q: float | None = None) -> float:
    """(1/n) sum_j c_j log2 c_j over the distinct w-phrases of the joint parse.

    With ``q`` given, the corrected form (1/n) sum_j (c_j + q^2) log2(c_j / (4 q^2))
    is returned instead.
    """
    jp = u if isinstance(u, JointParse) else joint_parse(u, w)
    c = np.asarray(jp.counts, dtype=float)
    if q is None:
        return float(np.sum(c * np.log2(c)) / jp.n)
    if q <= 0:
        raise ValidationError("q must be positive")
    q2 = q * q
    return float(np.sum((c + q2) * np.log2(c / (4 * q2))) / jp.n)


# ---------------------------------------------------------------------------
# maximum entropy under a difference-distortion constraint


@dataclass(frozen=True, eq=False)
class DifferenceDistortion:
    """rho(u, v) = varrho((u - v) mod alpha)."""

    varrho: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.varrho, dtype=float).ravel()
        if r.size < 1 or not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValidationError("varrho must be finite and nonnegative")
        if r[0] > r.min():
            raise ValidationError("varrho(0) must be the minimum")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "varrho", r)

    @classmethod
    def hamming(cls, alpha: int = 2) -> "DifferenceDistortion":
        r = np.ones(alpha)
        r[0] = 0.0
        return cls(r)

    @property
    def alpha(self) -> int:
        return int(self.varrho.size)

    @property
    def rho_max(self) -> float:
        return float(self.varrho.max())

    def table(self) -> np.ndarray:
        a = self.alpha
        u, v = np.meshgrid(np.arange(a), np.arange(a), indexing="ij")
        return self.varrho[(u - v) % a]

    def log_partition(self, theta: float) -> float:
        """log2 sum_u 2^(-theta varrho(u)), stable for large theta."""
        r = self.varrho
        m = r.min()
        return -theta * m + math.log2(np.sum(np.exp2(-theta * (r - m))))

    def tilted_mean(self, theta: float) -> float:
        r = self.varrho
        e = np.exp2(-theta * (r - r.min()))
        return float(e @ r / e.sum())


def _theta_for(dd: DifferenceDistortion, D: float) -> float:
    """theta >= 0 with tilted mean equal to D (mean decreases in theta)."""
    hi = 1.0
    while dd.tilted_mean(hi) > D:
        hi *= 2.0
        if hi > 1e9:
            return hi
    return brentq(lambda t: dd.tilted_mean(t) - D, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)


def phi(D: float, dd: DifferenceDistortion) -> float:
    """Max entropy (bits) over PMFs on Z_alpha with E varrho <= D.

    Evaluated as min over theta >= 0 of theta D + log2 sum_u 2^(-theta varrho(u))
    at its stationary point.
    """
    if D < 0:
        raise ValidationError("D must be nonnegative")
    r = dd.varrho
    rmin = r.min()
    if D < rmin - 1e-15:
        return -math.inf
    if D >= r.mean():
        return math.log2(dd.alpha)
    nmin = int(np.sum(r <= rmin + 1e-15))
    if D <= rmin + 1e-15:
        return math.log2(nmin)
    t = _theta_for(dd, D)
    return max(t * D + dd.log_partition(t), math.log2(nmin))


def psi(R: float, dd: DifferenceDistortion, tol: float = 1e-14) -> float:
    """Inverse of :func:`phi`: the smallest D with phi(D) >= R."""
    top = math.log2(dd.alpha)
    if R < 0 or R > top + 1e-12:
        raise ValidationError(f"R must lie in [0, {top}]")
    r = dd.varrho
    lo, hi = float(r.min()), float(r.mean())
    if R <= phi(lo, dd):
        return lo
    if R >= top:
        return hi
    return brentq(lambda D: phi(D, dd) - R, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def psi_dual(R: float, dd: DifferenceDistortion) -> float:
    """sup over vartheta >= 0 of vartheta [R - log2 sum_u 2^(-varrho(u)/vartheta)].

    Maximized over theta = 1/vartheta on a log scale; used to cross-check
    :func:`psi`.
    """
    def neg(t):
        th = math.exp(t)
        return -(R - dd.log_partition(th)) / th

    res = minimize_scalar(neg, bounds=(-25.0, 25.0), method="bounded", options={"xatol": 1e-12})
    return max(-res.fun, 0.0)


def two_sided_si_bound(u, w, C: float, dd: DifferenceDistortion, eta: float = 0.0, d: int = 0,
                       ell: int = 1, rho_max: float | None = None, q: float | None = None) -> BoundReport:
    """Distortion lower bound from the conditional LZ complexity of u given w.

    Psi(K - C - eta) - rho_max d / ell, clamped at zero, where K is the
    conditional LZ complexity. A complexity excess above log2(alpha) is clamped
    to log2(alpha) and flagged.
    """
    if C < 0:
        raise ValidationError("capacity must be nonnegative")
    jp = joint_parse(u, w)
    K = conditional_lz_complexity(jp, None, q)
    rho_max = dd.rho_max if rho_max is None else float(rho_max)
    arg = K - C - eta
    flags = [ASYMPTOTIC_FLAG] if eta == 0 else []
    top = math.log2(dd.alpha)
    if arg > top:
        flags.append("argument-clamped-to-log-alpha")
        arg = top
    dist = psi(arg, dd) if arg > 0 else 0.0
    penalty = rho_max * d / ell
    value = max(dist - penalty, 0.0)
    terms = {
        "lz_complexity": K,
        "capacity": C,
        "eta": eta,
        "argument": arg,
        "distortion": dist,
        "delay_penalty": penalty,
        "c_w": jp.c_w,
        "c_total": jp.c_total,
        "c_histogram": jp.histogram(),
    }
    if q is not None:
        terms["q"] = q
    return BoundReport(value=value, kind="distortion", terms=terms, vacuous=value <= 0.0, flags=flags)
