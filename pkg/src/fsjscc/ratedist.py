"""Rate-distortion functions: ordinary, conditional, Wyner-Ziv and common reconstruction.

Rates are in bits per source symbol. Slopes used internally are in nats per
unit distortion.

The ordinary and conditional functions are convex programs and are computed
from the Blahut lower bound maximized over the slope, so the returned value is
never above the true function. The Wyner-Ziv and common-reconstruction
functions are built from Lagrangian points produced by alternating
minimization; the returned value is the lower convex hull of those achievable
points (time sharing), so it never lies below what the returned test channel
actually achieves.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize_scalar
from scipy.special import logsumexp

from ._simplex import newton_simplex
from .core import Dmc, DistortionMeasure, FinitePmf, JointPmf, entropy
from .errors import InfeasibleError, ResourceCapError, ValidationError

LN2 = math.log(2.0)
AUX_CAP = 8
_TINY = 1e-300

__all__ = [
    "RdProblem",
    "WzSolution",
    "OracleResult",
    "rate_distortion",
    "distortion_rate",
    "conditional_rate_distortion",
    "wyner_ziv_rd",
    "wz_distortion_rate",
    "wz_oracle",
    "common_reconstruction_rd",
]


def _pmf_array(p) -> np.ndarray:
    if isinstance(p, FinitePmf):
        return np.asarray(p.p, dtype=float)
    return FinitePmf(p).p


def _table(rho) -> np.ndarray:
    if isinstance(rho, DistortionMeasure):
        return np.asarray(rho.table, dtype=float)
    return DistortionMeasure(rho).table


# ---------------------------------------------------------------------------
# problem container


@dataclass(frozen=True, eq=False)
class RdProblem:
    """Source, distortion table and optional side-information channel.

    When ``ell > 1`` the source lives on the ``ell``-block superalphabet, ``rho``
    and ``side`` are the block versions, and every rate or distortion handed to
    or returned by the solvers is normalized per source symbol.
    """

    source: FinitePmf
    rho: DistortionMeasure
    side: Dmc | None = None
    ell: int = 1

    def __post_init__(self):
        if not isinstance(self.source, FinitePmf):
            object.__setattr__(self, "source", FinitePmf(self.source))
        if not isinstance(self.rho, DistortionMeasure):
            object.__setattr__(self, "rho", DistortionMeasure(self.rho))
        if self.side is not None and not isinstance(self.side, Dmc):
            object.__setattr__(self, "side", Dmc(self.side))
        if self.ell < 1:
            raise ValidationError("block length must be >= 1")
        if self.rho.shape[0] != self.source.size:
            raise ValidationError("distortion table rows must match the source alphabet")
        if self.side is not None and self.side.nin != self.source.size:
            raise ValidationError("side-information channel input must match the source alphabet")

    @classmethod
    def blocks(cls, source, rho: DistortionMeasure, side: Dmc | None, ell: int) -> "RdProblem":
        """Problem on ``ell``-blocks from a block source PMF and single-letter rho/side."""
        rho = rho if isinstance(rho, DistortionMeasure) else DistortionMeasure(rho)
        side = None if side is None else (side if isinstance(side, Dmc) else Dmc(side))
        return cls(
            source if isinstance(source, FinitePmf) else FinitePmf(source),
            rho.block(ell),
            None if side is None else side.power(ell),
            ell,
        )

    @property
    def joint(self) -> np.ndarray:
        """``P[u, w]``; a single dummy side symbol when there is no side information."""
        p = np.asarray(self.source.p)
        if self.side is None:
            return p[:, None].copy()
        return p[:, None] * self.side.P

    def default_aux_size(self) -> int:
        return min(self.source.size + 1, AUX_CAP)

    def key(self) -> tuple:
        side = b"" if self.side is None else self.side.P.tobytes()
        return (self.source.p.tobytes(), self.rho.table.tobytes(), self.rho.shape, side, self.ell)


@dataclass(frozen=True, eq=False)
class WzSolution:
    """Wyner-Ziv operating point with its test channel and decoder.

    ``test_channel[u, a]`` is P(a|u) and ``decoder[a, w]`` is the reconstruction
    index. ``rate`` and ``distortion`` are per source symbol.
    """

    rate: float
    test_channel: np.ndarray
    decoder: np.ndarray
    distortion: float
    ell: int = 1
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.rate)

    @property
    def aux_size(self) -> int:
        return int(self.test_channel.shape[1])


@dataclass(frozen=True)
class OracleResult:
    value: float
    resolution: float
    npoints: int
    warning: str | None = None

    def __float__(self):
        return float(self.value)


# ---------------------------------------------------------------------------
# ordinary and conditional RDF via the Blahut dual


def _slope_cap(conds, d) -> float:
    gaps = []
    for pc in conds:
        sub = d[pc > 0]
        g = sub - sub.min(axis=1, keepdims=True)
        g = g[g > 1e-12]
        if g.size:
            gaps.append(g.min())
    if not gaps:
        return 0.0
    return 60.0 / min(gaps)


class _Dual:
    """Blahut lower bound g(s) for a mixture of sources sharing one slope.

    For every slope s and every output PMF q,
    R(D) >= -s D + g(s, q) (nats); the bound is tight at the fixed point.
    """

    def __init__(self, weights, conds, d):
        self.w = np.asarray(weights, dtype=float)
        self.conds = [np.asarray(c, dtype=float) for c in conds]
        self.d = d
        nv = d.shape[1]
        self.q = [np.full(nv, 1.0 / nv) for _ in conds]
        self.s_last = None

    def g(self, s: float, tol: float = 1e-13, max_iter: int = 300) -> float:
        total = 0.0
        for k, (wk, pc) in enumerate(zip(self.w, self.conds)):
            if wk <= 0:
                continue
            m = pc > 0
            pm, dm = pc[m], self.d[m]
            # shift each row by its minimum so the kernel cannot underflow entirely
            base = dm.min(axis=1)
            K = np.exp(-s * (dm - base[:, None]))
            q = self.q[k]
            if q.min() <= 0.0:
                # multiplicative updates cannot revive a zero coordinate
                q = 0.5 * q + 0.5 / q.size
            converged = False
            for _ in range(max_iter):
                Z = np.maximum(K @ q, _TINY)
                c = (pm / Z) @ K
                top = c.max()
                gap = math.log(top) - q @ np.log(np.maximum(c, _TINY))
                if gap < tol:
                    converged = True
                    break
                q = q * c / top
                q /= q.sum()
            if not converged:
                # slow (sublinear) regime near a support change: finish with Newton
                q = _newton_output(pm, K, q)
                Z = np.maximum(K @ q, _TINY)
                top = ((pm / Z) @ K).max()
            self.q[k] = q
            total += wk * (-(pm @ np.log(Z)) + s * (pm @ base) - math.log(top))
        return total


def _newton_output(p, K, q) -> np.ndarray:
    """Minimize F(q) = -sum_u p_u log (Kq)_u over the simplex (the Blahut-Arimoto fixed point)."""

    def fun(x):
        return -(p @ np.log(np.maximum(K @ x, _TINY)))

    def grad_hess(x):
        Z = np.maximum(K @ x, _TINY)
        return -((p / Z) @ K), K.T @ ((p / Z**2)[:, None] * K)

    return newton_simplex(fun, grad_hess, q)


def _dual_rate(weights, conds, d, D) -> tuple[float, float]:
    """max_s [-sD + g(s)] in bits; returns (rate, slope)."""
    dual = _Dual(weights, conds, d)
    s_max = _slope_cap(conds, d)
    if s_max == 0.0:
        return 0.0, 0.0

    def neg(t):
        s = math.exp(t)
        return -(-s * D + dual.g(s))

    lo, hi = math.log(1e-6), math.log(s_max)
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    best, t = -res.fun, res.x
    for te in (lo, hi):
        v = -neg(te)
        if v > best:
            best, t = v, te
    return max(best, 0.0) / LN2, math.exp(t)


def _dual_distortion(weights, conds, d, R_bits) -> float:
    """sup_s (g(s) - R)/s; a lower bound on D(R) that is tight at the optimum."""
    dual = _Dual(weights, conds, d)
    s_max = _slope_cap(conds, d)
    Rn = R_bits * LN2

    def neg(t):
        s = math.exp(t)
        return -(dual.g(s) - Rn) / s

    lo, hi = math.log(1e-6), math.log(s_max)
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-11})
    return max(-res.fun, -neg(hi))


def _dmin_dmax(weights, conds, d):
    dmin = sum(w * (pc @ d.min(axis=1)) for w, pc in zip(weights, conds))
    dmax = sum(w * (pc @ d).min() for w, pc in zip(weights, conds))
    return float(dmin), float(dmax)


def rate_distortion(p, rho, D: float) -> float:
    """Ordinary rate-distortion function R(D) in bits.

    Exactly 0 once ``D`` reaches the best constant-reconstruction distortion.
    Raises :class:`InfeasibleError` when ``D`` is below the smallest achievable
    distortion.
    """
    p, d = _pmf_array(p), _table(rho)
    return _conditional_rd([1.0], [p], d, D)


def _conditional_rd(weights, conds, d, D) -> float:
    if D < 0:
        raise ValidationError("distortion level must be nonnegative")
    dmin, dmax = _dmin_dmax(weights, conds, d)
    if D < dmin - 1e-12:
        raise InfeasibleError(f"D={D} is below the minimum achievable distortion {dmin}")
    if D >= dmax - 1e-15:
        return 0.0
    return _dual_rate(weights, conds, d, max(D, dmin))[0]


def distortion_rate(p, rho, R: float) -> float:
    """Distortion-rate function D(R), the inverse of :func:`rate_distortion`."""
    p, d = _pmf_array(p), _table(rho)
    return _conditional_dr([1.0], [p], d, R)


def _conditional_dr(weights, conds, d, R) -> float:
    if R < 0:
        raise ValidationError("rate must be nonnegative")
    dmin, dmax = _dmin_dmax(weights, conds, d)
    if R <= 0 or dmax - dmin < 1e-15:
        return dmax
    top = _dual_rate(weights, conds, d, dmin)[0]
    if R >= top - 1e-12:
        return dmin
    return float(min(max(_dual_distortion(weights, conds, d, R), dmin), dmax))


def _split_joint(joint):
    P = np.asarray(joint.p if isinstance(joint, JointPmf) else joint, dtype=float)
    if P.ndim != 2:
        raise ValidationError("conditional RDF needs a joint PMF over (U, W)")
    pw = P.sum(axis=0)
    keep = pw > 0
    conds = [P[:, j] / pw[j] for j in np.flatnonzero(keep)]
    return pw[keep], conds


def conditional_rate_distortion(joint, rho, D: float) -> float:
    """R_{U|W}(D): both encoder and decoder see W; common slope across w."""
    weights, conds = _split_joint(joint)
    return _conditional_rd(weights, conds, _table(rho), D)


def conditional_distortion_rate(joint, rho, R: float) -> float:
    weights, conds = _split_joint(joint)
    return _conditional_dr(weights, conds, _table(rho), R)


def _ba_test_channel(pu, rho, s, max_iter=5000):
    """Blahut test channel P(v|u) of the ordinary problem at slope s (nats)."""
    nv = rho.shape[1]
    q = np.full(nv, 1.0 / nv)
    lk = -s * rho
    lk = lk - lk.max(axis=1, keepdims=True)
    for _ in range(max_iter):
        Q = np.exp(lk) * q
        Q /= Q.sum(axis=1, keepdims=True)
        qn = pu @ Q
        if np.max(np.abs(qn - q)) < 1e-15:
            break
        q = qn
    return Q


# ---------------------------------------------------------------------------
# Wyner-Ziv and common reconstruction: alternating minimization


class _Model:
    """Arrays shared by the nonconvex solvers (superalphabet level)."""

    def __init__(self, prob: RdProblem, common: bool, aux: int | None):
        self.pu = np.asarray(prob.source.p)
        self.rho = np.asarray(prob.rho.table)
        self.Pw = np.ones((self.pu.size, 1)) if prob.side is None else np.asarray(prob.side.P)
        self.puw = self.pu[:, None] * self.Pw
        pw = self.puw.sum(axis=0)
        self.pu_w = np.divide(self.puw, pw, out=np.zeros_like(self.puw), where=pw > 0)
        self.nu, self.nv = self.rho.shape
        self.nw = self.Pw.shape[1]
        self.common = common
        if common:
            self.na = self.nv
        else:
            self.na = prob.default_aux_size() if aux is None else int(aux)
        if self.na < 1:
            raise ValidationError("auxiliary alphabet must be nonempty")
        if not common and self.na > AUX_CAP and aux is None:
            raise ResourceCapError("auxiliary alphabet exceeds the cap")
        self.G_common = np.tile(np.arange(self.nv)[:, None], (1, self.nw))

    def best_G(self, Pa):
        if self.common:
            return np.broadcast_to(self.G_common, (Pa.shape[0],) + self.G_common.shape)
        cost = np.einsum("uw,bua,uv->bawv", self.puw, Pa, self.rho, optimize=True)
        return cost.argmin(axis=-1)

    def dist_ua(self, G):
        # d[b,u,a] = sum_w P(w|u) rho(u, G[b,a,w])
        rg = self.rho[np.arange(self.nu)[None, :, None, None], G[:, None, :, :]]
        return np.einsum("uw,buaw->bua", self.Pw, rg)

    def evaluate(self, Pa, G):
        """(I(U;A|W) in nats, expected distortion) per batch element."""
        r = np.einsum("uw,bua->baw", self.pu_w, Pa)
        lr = np.log(np.maximum(r, _TINY))
        lp = np.log(np.maximum(Pa, _TINY))
        # sum_{u,w,a} p(u,w) P(a|u) [log P(a|u) - log r(a|w)]
        t1 = np.einsum("u,bua,bua->b", self.pu, Pa, lp)
        t2 = np.einsum("uw,bua,baw->b", self.puw, Pa, lr)
        I = np.maximum(t1 - t2, 0.0)
        D = np.einsum("u,bua,bua->b", self.pu, Pa, self.dist_ua(G))
        return I, D

    def _iterate(self, s, Pa, n):
        for _ in range(n):
            G = self.best_G(Pa)
            d = self.dist_ua(G)
            r = np.einsum("uw,bua->baw", self.pu_w, Pa)
            lr = np.log(np.maximum(r, _TINY))
            e = np.einsum("uw,baw->bua", self.Pw, lr) - s * d
            e -= e.max(axis=-1, keepdims=True)
            Pa = np.exp(e)
            Pa /= Pa.sum(axis=-1, keepdims=True)
        return Pa

    def lagrangian(self, s, Pa):
        G = np.array(self.best_G(Pa))
        I, D = self.evaluate(Pa, G)
        return I + s * D, G, I, D

    def descend(self, s, Pa, burn_in=150, keep=4, max_iter=1500, tol=1e-12, check=25):
        """Burn in every start, then run the ``keep`` best to convergence.

        Returns the polished starts (in their original order, best first among
        ties) together with the Lagrangian values of all starts after burn-in.
        """
        Pa = self._iterate(s, Pa.copy(), burn_in)
        L0, _, _, _ = self.lagrangian(s, Pa)
        order = np.argsort(L0, kind="stable")[:keep]
        sel = Pa[np.sort(order)]
        last = None
        for _ in range(0, max_iter, check):
            sel = self._iterate(s, sel, check)
            L, G, I, D = self.lagrangian(s, sel)
            if last is not None and np.max(np.abs(last - L)) < tol * (1.0 + np.max(np.abs(L))):
                break
            last = L
        return sel, G, I, D, np.sort(order), L0

    def pad(self, Pa):
        """Embed a test channel into the solver's auxiliary alphabet, or None."""
        k = Pa.shape[1]
        if k > self.na:
            used = np.flatnonzero(Pa.sum(axis=0) > 1e-14)
            if used.size > self.na:
                return None
            Pa = Pa[:, used]
            k = Pa.shape[1]
        out = np.zeros((self.nu, self.na))
        out[:, :k] = Pa
        return out


@dataclass
class _Point:
    D: float
    R: float  # bits, superalphabet
    Pa: np.ndarray
    G: np.ndarray


def _lower_hull(pts):
    """Lower convex hull, nonincreasing part, sorted by distortion."""
    pts = sorted(pts, key=lambda p: (p.D, p.R))
    hull = []
    for p in pts:
        if hull and p.R >= hull[-1].R - 1e-15:
            continue  # dominated: more distortion, no rate saving
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b if it lies on or above segment a-p
            if (b.R - a.R) * (p.D - a.D) >= (p.R - a.R) * (b.D - a.D) - 1e-15:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


class _Curve:
    """Achievable (D, R) points refined adaptively around queried operating points."""

    def __init__(self, prob: RdProblem, common: bool, aux, restarts: int, seed: int):
        self.prob = prob
        self.m = _Model(prob, common, aux)
        self.restarts = restarts
        self.seed = seed
        m = self.m
        ss = np.random.SeedSequence(seed).spawn(restarts)
        self.starts = np.stack(
            [np.random.default_rng(x).dirichlet(np.ones(m.na), size=m.nu) for x in ss]
        ) if restarts else np.zeros((0, m.nu, m.na))
        self.points: list[_Point] = []
        self.dispersion = 0.0
        self.solves = 0
        self._endpoints()

    def _add(self, Pa, G):
        I, D = self.m.evaluate(Pa[None], G[None])
        p = _Point(float(D[0]), float(I[0]) / LN2, Pa, G)
        self.points.append(p)
        return p

    def _endpoints(self):
        m = self.m
        # zero rate: one auxiliary symbol, best estimator from W alone
        Pa = np.zeros((m.nu, m.na))
        if m.common:
            v = int((m.pu @ m.rho).argmin())
            Pa[:, v] = 1.0
        else:
            Pa[:, 0] = 1.0
        self._add(Pa, np.array(m.best_G(Pa[None])[0]))
        # lossless: A carries the best reconstruction of U
        f = m.rho.argmin(axis=1)
        if m.common:
            Pa = np.zeros((m.nu, m.na))
            Pa[np.arange(m.nu), f] = 1.0
            self._add(Pa, np.array(m.G_common))
        elif m.na >= m.nu:
            Pa = np.zeros((m.nu, m.na))
            Pa[np.arange(m.nu), np.arange(m.nu)] = 1.0
            G = np.tile(f[:m.nu, None], (1, m.nw))
            G = np.vstack([G, np.zeros((m.na - m.nu, m.nw), dtype=int)])
            self._add(Pa, G)
        else:
            vals = np.unique(f)
            if vals.size <= m.na:
                Pa = np.zeros((m.nu, m.na))
                idx = np.searchsorted(vals, f)
                Pa[np.arange(m.nu), idx] = 1.0
                G = np.zeros((m.na, m.nw), dtype=int)
                G[: vals.size] = vals[:, None]
                self._add(Pa, G)
        self.dmin = float(m.pu @ m.rho.min(axis=1))

    def _seed_rd(self, s):
        return _ba_test_channel(self.m.pu, self.m.rho, s)

    def solve(self, s, warm=()):
        m = self.m
        batch = [self.starts[i] for i in range(len(self.starts))]
        for Pa in list(warm) + [self._seed_rd(s)]:
            if Pa is None:
                continue
            e = m.pad(Pa)
            if e is not None:
                batch.append(0.999 * e + 0.001 / m.na if m.common else e)
        if m.common:
            # the common-reconstruction program is convex; a uniform start suffices
            batch.append(np.full((m.nu, m.na), 1.0 / m.na))
        B = np.stack(batch)
        Pa, G, I, D, idx, L0 = m.descend(s, B)
        L = I + s * D
        self.solves += 1
        if self.restarts > 1:
            self.dispersion = float(np.std(L0[: self.restarts]) / LN2)
        k = int(np.argmin(L))  # ties resolve to the lowest start index
        return Pa[k], G[k]

    def hull(self):
        return _lower_hull(self.points)

    def _segment_for(self, key, target, hull):
        for a, b in zip(hull, hull[1:]):
            va, vb = key(a), key(b)
            lo, hi = min(va, vb), max(va, vb)
            if lo - 1e-15 <= target <= hi + 1e-15:
                return a, b
        return None

    def refine(self, key, target, max_rounds=40, tol=1e-10):
        tight = set()
        for _ in range(max_rounds):
            hull = self.hull()
            seg = self._segment_for(key, target, hull)
            if seg is None:
                return
            a, b = seg
            sid = (a.D, a.R, b.D, b.R)
            if sid in tight:
                return
            if b.D - a.D < 1e-13:
                return
            s_bits = (a.R - b.R) / (b.D - a.D)
            s = s_bits * LN2
            Pa, G = self.solve(s, warm=(a.Pa, b.Pa))
            p = self._add(Pa, G)
            line = a.R + s_bits * a.D
            if p.R + s_bits * p.D >= line - tol:
                tight.add(sid)

    def at_distortion(self, D):
        if D > self.dmin + 1e-13:
            self.refine(lambda p: p.D, D)
        hull = self.hull()
        if D >= hull[-1].D:
            return hull[-1], None, 1.0
        seg = self._segment_for(lambda p: p.D, D, hull)
        a, b = seg
        lam = (b.D - D) / (b.D - a.D)
        return a, b, lam

    def at_rate(self, R):
        self.refine(lambda p: p.R, R)
        hull = self.hull()
        seg = self._segment_for(lambda p: p.R, R, hull)
        a, b = seg
        lam = (R - b.R) / (a.R - b.R) if a.R > b.R else 1.0
        return a, b, lam


def _atoms(m: _Model, points):
    """Split test channels into atoms (p(u|a), decoder row, distortion, H(U|W, A=a))."""
    pis, rows, dist, hcond = [], [], [], []
    for p in points:
        pa = m.pu @ p.Pa
        for j in np.flatnonzero(pa > 1e-15):
            pi = m.pu * p.Pa[:, j] / pa[j]
            g = p.G[j]
            juw = pi[:, None] * m.Pw
            jw = juw.sum(axis=0)
            cond = np.divide(juw, jw, out=np.zeros_like(juw), where=jw > 0)
            h = -np.sum(juw[juw > 0] * np.log2(cond[juw > 0]))
            pis.append(pi)
            rows.append(g)
            dist.append(np.sum(juw * m.rho[:, g]))
            hcond.append(h)
    return np.array(pis), np.array(rows), np.array(dist), np.array(hcond)


def _mix(m: _Model, points, D: float):
    """Best mixture of known atoms meeting the distortion budget.

    With the atoms fixed, rate and distortion are linear in the weights p(a),
    so a basic optimal solution of this LP uses at most |U| + 1 atoms.
    """
    pis, rows, dist, hcond = _atoms(m, points)
    res = linprog(
        -hcond,
        A_ub=dist[None, :],
        b_ub=[D + 1e-12],
        A_eq=pis.T,
        b_eq=m.pu,
        bounds=(0, None),
        method="highs-ds",
    )
    if res.status != 0:
        return None
    lam = np.where(res.x > 1e-13, res.x, 0.0)
    used = np.flatnonzero(lam)
    safe = np.where(m.pu > 0, m.pu, 1.0)
    Pa = (lam[used][None, :] * pis[used].T) / safe[:, None]
    Pa[m.pu <= 0] = 0.0
    Pa[m.pu <= 0, 0] = 1.0
    Pa /= Pa.sum(axis=1, keepdims=True)
    return Pa, rows[used]


def _merge_common(m: _Model, Pa, G):
    merged = np.zeros((m.nu, m.nv))
    for j in range(Pa.shape[1]):
        merged[:, G[j, 0]] += Pa[:, j]
    return merged, np.array(m.G_common)


def _solution(prob, m, Pa, G, diagnostics) -> WzSolution:
    I, D = m.evaluate(Pa[None], G[None])
    ell = prob.ell
    return WzSolution(
        rate=float(I[0]) / LN2 / ell,
        test_channel=Pa,
        decoder=np.asarray(G, dtype=int),
        distortion=float(D[0]) / ell,
        ell=ell,
        diagnostics=diagnostics,
    )


def _require_side(prob: RdProblem):
    if not isinstance(prob, RdProblem):
        raise ValidationError("expected an RdProblem")
    if prob.side is None:
        raise ValidationError("this function needs a side-information channel")


def _independent_solution(prob: RdProblem, D_super: float) -> WzSolution:
    p, d = np.asarray(prob.source.p), np.asarray(prob.rho.table)
    dmin, dmax = _dmin_dmax([1.0], [p], d)
    m = _Model(prob, True, None)
    if D_super >= dmax - 1e-15:
        value, s = 0.0, 0.0
        Pa = np.zeros_like(d)
        Pa[:, int((p @ d).argmin())] = 1.0
    else:
        value, s = _dual_rate([1.0], [p], d, D_super)
        Pa = _ba_test_channel(p, d, s)
    sol = _solution(prob, m, Pa, np.array(m.G_common), {"method": "ordinary", "slope": s})
    diag = {**sol.diagnostics, "pair_rate": sol.rate}
    return WzSolution(value / prob.ell, sol.test_channel, sol.decoder, sol.distortion, prob.ell, diag)


def _wz_like(prob: RdProblem, D: float, common: bool, aux, restarts, seed,
             curve: _Curve | None = None) -> WzSolution:
    _require_side(prob)
    if D < 0:
        raise ValidationError("distortion level must be nonnegative")
    Ds = D * prob.ell
    c = _Curve(prob, common, aux, restarts, seed) if curve is None else curve
    if Ds < c.dmin - 1e-12:
        raise InfeasibleError(f"D={D} is below the minimum achievable distortion {c.dmin / prob.ell}")
    Ds = max(Ds, c.dmin)
    a, b, lam = c.at_distortion(Ds)
    mixed = _mix(c.m, c.points, Ds)
    if mixed is None:
        Pa, G = a.Pa, a.G  # only reachable through LP failure; the hull vertex is feasible
    else:
        Pa, G = mixed
    if common:
        Pa, G = _merge_common(c.m, Pa, G)
        m = c.m
    else:
        m = _Model(prob, False, Pa.shape[1])
    hull_rate = a.R if b is None else lam * a.R + (1 - lam) * b.R
    diag = {
        "restarts": restarts,
        "seed": seed,
        "restart_dispersion": c.dispersion,
        "lagrangian_solves": c.solves,
        "hull_points": len(c.hull()),
        "hull_rate": hull_rate / prob.ell,
        "aux_size": int(Pa.shape[1]),
        "aux_cap": c.m.na,
    }
    return _solution(prob, m, Pa, G, diag)


def wyner_ziv_rd(prob: RdProblem, D: float, aux: int | None = None, restarts: int = 32,
                 seed: int = 0) -> WzSolution:
    """Wyner-Ziv rate-distortion function at distortion ``D`` (per symbol).

    The auxiliary alphabet defaults to ``min(|U| + 1, 8)``. The nonconvex
    program is attacked with ``restarts`` seeded random starts plus warm starts;
    the reported rate is achieved by the returned test channel and decoder.
    When the side information is independent of the source the ordinary RDF is
    returned.
    """
    _require_side(prob)
    if prob.side.is_input_independent():
        if D < 0:
            raise ValidationError("distortion level must be nonnegative")
        dmin = float(prob.source.p @ prob.rho.table.min(axis=1))
        if D * prob.ell < dmin - 1e-12:
            raise InfeasibleError(f"D={D} is below the minimum achievable distortion")
        return _independent_solution(prob, max(D * prob.ell, dmin))
    return _wz_like(prob, D, False, aux, restarts, seed)


def common_reconstruction_rd(prob: RdProblem, D: float, restarts: int = 4, seed: int = 0) -> float:
    """min I(U;V|W) over P(v|u) with E rho(U,V) <= D: the decoder output is V itself."""
    return common_reconstruction_solution(prob, D, restarts, seed).rate


def common_reconstruction_solution(prob: RdProblem, D: float, restarts: int = 4,
                                   seed: int = 0) -> WzSolution:
    _require_side(prob)
    return _wz_like(prob, D, True, None, restarts, seed)


def wz_distortion_rate(prob: RdProblem, R: float, aux: int | None = None, restarts: int = 32,
                       seed: int = 0) -> float:
    """Inverse of :func:`wyner_ziv_rd`: smallest distortion at rate ``R`` per symbol."""
    _require_side(prob)
    if R < 0:
        raise ValidationError("rate must be nonnegative")
    ell = prob.ell
    if prob.side.is_input_independent():
        return distortion_rate(prob.source, prob.rho, R * ell) / ell
    c = _Curve(prob, False, aux, restarts, seed)
    Rs = R * ell
    hull = c.hull()
    if Rs <= hull[-1].R + 1e-15:
        return hull[-1].D / ell
    if Rs >= hull[0].R - 1e-15:
        return hull[0].D / ell
    a, b, lam = c.at_rate(Rs)
    hull_value = lam * a.D + (1 - lam) * b.D
    pis, rows, dist, hcond = _atoms(c.m, c.points)
    hu = float(np.sum(c.m.puw[c.m.puw > 0] * -np.log2(c.m.pu_w[c.m.puw > 0])))
    res = linprog(dist, A_ub=-hcond[None, :], b_ub=[Rs - hu + 1e-12], A_eq=pis.T, b_eq=c.m.pu,
                  bounds=(0, None), method="highs-ds")
    value = min(hull_value, res.fun) if res.status == 0 else hull_value
    return max(value, c.dmin) / ell


def wz_curve(prob: RdProblem, Ds, common: bool = False, aux: int | None = None,
             restarts: int = 32, seed: int = 0) -> list[WzSolution]:
    """Solutions along a distortion grid sharing one set of Lagrangian points."""
    _require_side(prob)
    if prob.side.is_input_independent() and not common:
        return [wyner_ziv_rd(prob, D) for D in Ds]
    c = _Curve(prob, common, aux, restarts, seed)
    return [_wz_like(prob, D, common, aux, restarts, seed, curve=c) for D in Ds]


# ---------------------------------------------------------------------------
# brute-force oracle


def _grid_rows(k: int, res: float) -> np.ndarray:
    n = int(round(1.0 / res))
    rows = [c for c in itertools.product(range(n + 1), repeat=k - 1) if sum(c) <= n]
    rows = np.array([list(c) + [n - sum(c)] for c in rows], dtype=float) / n
    return rows


def _envelope(Ds: np.ndarray, Rs: np.ndarray, D: float) -> float:
    pts = [_Point(float(a), float(b), None, None) for a, b in zip(Ds, Rs)]
    hull = _lower_hull(pts)
    if D < hull[0].D - 1e-12:
        return math.inf
    if D >= hull[-1].D:
        return hull[-1].R
    for a, b in zip(hull, hull[1:]):
        if a.D <= D <= b.D:
            lam = (b.D - D) / (b.D - a.D)
            return lam * a.R + (1 - lam) * b.R
    return hull[-1].R


def _oracle_cloud(prob: RdProblem, res: float, na: int, markov: bool, chunk: int = 20000):
    pu = np.asarray(prob.source.p)
    rho = np.asarray(prob.rho.table)
    Pw = np.asarray(prob.side.P)
    nu, nv = rho.shape
    nw = Pw.shape[1]
    puw = pu[:, None] * Pw
    pw = puw.sum(axis=0)
    if markov:
        k, nrows = na, nu
    else:
        k, nrows = nv, nu * nw
    rows = _grid_rows(k, res)
    first = rows[np.all(np.diff(rows, axis=1) <= 0, axis=1)] if markov else rows
    grids = [first] + [rows] * (nrows - 1)
    total = int(np.prod([len(g) for g in grids]))
    if total > 5_000_000:
        raise ResourceCapError(f"oracle grid has {total} points")
    idx_iter = itertools.product(*[range(len(g)) for g in grids])
    Ds, Rs = [], []
    while True:
        block = list(itertools.islice(idx_iter, chunk))
        if not block:
            break
        ix = np.array(block)
        P = np.stack([grids[j][ix[:, j]] for j in range(nrows)], axis=1)  # (B, rows, k)
        if markov:
            # exact decoder per (a, w)
            cost = np.einsum("uw,bua,uv->bawv", puw, P, rho)
            D = cost.min(axis=-1).sum(axis=(1, 2))
            joint = np.einsum("uw,bua->buwa", puw, P)
        else:
            Pv = P.reshape(P.shape[0], nu, nw, k)
            joint = puw[None, :, :, None] * Pv
            D = np.einsum("buwv,uv->b", joint, rho)
        # I(U;A|W) = H(A|W) - H(A|U,W)
        paw = joint.sum(axis=1)  # (B, w, a)
        def h(x):
            x = np.where(x > 0, x, 1.0)
            return -(x * np.log2(x))
        Haw = h(paw).sum(axis=(1, 2)) - h(pw).sum()
        Hauw = h(joint).sum(axis=(1, 2, 3)) - h(puw).sum()
        Ds.append(D)
        Rs.append(np.maximum(Haw - Hauw, 0.0))
    return np.concatenate(Ds), np.concatenate(Rs), total


def wz_oracle(prob: RdProblem, D: float, resolution: float = 0.05, aux: int | None = None,
              markov: bool = True, tol: float | None = None) -> OracleResult:
    """Simplex-grid brute force for the Wyner-Ziv (or, with ``markov=False``, conditional) RDF.

    Every test channel on the grid is evaluated with its exact optimal decoder
    and the lower convex envelope of the resulting (D, R) cloud is returned.
    With ``tol`` set, the value is recomputed on the grid of twice the spacing
    and a warning is attached when the two disagree by more than ``tol``.
    """
    _require_side(prob)
    nu, nv = prob.rho.shape
    na = min(nu + 1, 4) if aux is None else int(aux)
    if max(nu, prob.side.nout, nv) > 3 or na > 4:
        raise ResourceCapError("oracle supports alphabets of size <= 3 and |A| <= 4")
    Ds, Rs, npts = _oracle_cloud(prob, resolution, na, markov)
    value = _envelope(Ds, Rs, D * prob.ell) / prob.ell
    warning = None
    if tol is not None:
        n = int(round(1.0 / resolution))
        if n % 2 == 0:
            Dc, Rc, _ = _oracle_cloud(prob, 2 * resolution, na, markov)
            coarse = _envelope(Dc, Rc, D * prob.ell) / prob.ell
            if abs(coarse - value) > tol:
                warning = f"grid not converged: spacing {2 * resolution} gives {coarse:.6f}"
        else:
            warning = "cannot assess grid convergence for this spacing"
    return OracleResult(float(value), resolution, npts, warning)
