"""Channel capacity, sphere-packing exponent and causal-state capacity.

Rates and exponents are in bits. Internally the iterative solvers work in
nats and convert on return.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog, minimize, minimize_scalar

from ._simplex import newton_simplex
from .core import Dmc, FinitePmf, channel_mutual_information, conditional_divergence
from .errors import InfeasibleError, ResourceCapError, ValidationError

LN2 = math.log(2.0)

__all__ = [
    "Dmc",
    "CostFunction",
    "StateChannel",
    "CapacityResult",
    "capacity",
    "gallager_e0",
    "r_infinity",
    "SpherePacking",
    "sphere_packing",
    "sphere_packing_exponent",
    "sphere_packing_primal",
    "causal_state_capacity",
    "strategy_channel",
]


@dataclass(frozen=True, eq=False)
class CostFunction:
    phi: np.ndarray
    budget: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).ravel()
        if not np.all(np.isfinite(phi)) or np.any(phi < 0):
            raise ValidationError("cost entries must be finite and nonnegative")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "budget", float(self.budget))

    @property
    def feasible(self) -> bool:
        return self.budget >= self.phi.min() - 1e-12


@dataclass(frozen=True, eq=False)
class StateChannel:
    """Channel ``P[x, s, y] = P(y|x,s)`` with i.i.d. states drawn from ``ps``."""

    P: np.ndarray
    ps: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        if P.ndim != 3:
            raise ValidationError("state channel must be indexed [x, s, y]")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=2) - 1) > 1e-9):
            raise ValidationError("each (x, s) row must be a PMF")
        ps = FinitePmf(self.ps).p
        if ps.size != P.shape[1]:
            raise ValidationError("state PMF size does not match channel")
        object.__setattr__(self, "P", P / P.sum(axis=2, keepdims=True))
        object.__setattr__(self, "ps", ps)

    @property
    def nin(self):
        return self.P.shape[0]

    @property
    def nstates(self):
        return self.P.shape[1]

    @property
    def nout(self):
        return self.P.shape[2]

    def averaged(self) -> Dmc:
        """State-blind channel sum_s P_S(s) P(y|x,s)."""
        return Dmc(np.einsum("s,xsy->xy", self.ps, self.P))


@dataclass
class CapacityResult:
    value: float
    input_pmf: np.ndarray
    iterations: int = 0
    multiplier: float = 0.0

    def __iter__(self):
        yield self.value
        yield self.input_pmf


# ---------------------------------------------------------------------------
# capacity


def _row_divergences(W, q):
    # D(W(.|x) || q) in nats for every x
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(W > 0, W * np.log(W / q), 0.0)
    return t.sum(axis=1)


def _blahut_arimoto(W, s=0.0, phi=None, p0=None, tol=1e-13, max_iter=50):
    """Maximize I(p, W) - s E_p[phi] (nats). Returns (p, iterations).

    Plain alternating updates first; if the duality gap has not closed after
    ``max_iter`` of them (nearly duplicate rows make the updates crawl), the
    concave program is finished by Newton steps on the simplex.
    """
    nx = W.shape[0]
    phi = np.zeros(nx) if phi is None else phi
    p = np.full(nx, 1.0 / nx) if p0 is None else np.asarray(p0, float).copy()
    if p.min() <= 0.0:
        p = 0.5 * p + 0.5 / nx
    it = 0
    for it in range(1, max_iter + 1):
        c = _row_divergences(W, p @ W) - s * phi
        lower = p @ c
        upper = c.max()
        if upper - lower < tol:
            return p, it
        p = p * np.exp(c - upper)
        p /= p.sum()
    return _newton_capacity(W, s, phi, p), it


def _newton_capacity(W, s, phi, p):
    used = W.sum(axis=0) > 0
    Wu = W[:, used]

    def fun(x):
        return -channel_mutual_information(x, W) * LN2 + s * (x @ phi)

    def grad_hess(x):
        q = np.maximum(x @ Wu, 1e-300)
        g = -_row_divergences(Wu, q) + 1.0 + s * phi
        return g, Wu @ (Wu / q).T

    return newton_simplex(fun, grad_hess, p)


def capacity(ch: Dmc, cost: CostFunction | None = None, tol: float = 1e-13) -> CapacityResult:
    """Capacity in bits per channel use, optionally under an average cost budget."""
    W = ch.P
    if cost is None:
        p, it = _blahut_arimoto(W, tol=tol)
        return CapacityResult(channel_mutual_information(p, W), p, it)

    phi = cost.phi
    if phi.size != W.shape[0]:
        raise ValidationError("cost table does not match channel input alphabet")
    if not cost.feasible:
        raise InfeasibleError(f"budget {cost.budget} below minimum cost {phi.min()}")
    gamma = cost.budget

    p, it = _blahut_arimoto(W, tol=tol)
    if p @ phi <= gamma + 1e-12:
        return CapacityResult(channel_mutual_information(p, W), p, it)

    if gamma <= phi.min() + 1e-12:
        # only minimum-cost inputs are usable
        keep = np.flatnonzero(phi <= phi.min() + 1e-12)
        sub, it = _blahut_arimoto(W[keep], tol=tol)
        p = np.zeros(W.shape[0])
        p[keep] = sub
        return CapacityResult(channel_mutual_information(p, W), p, it, math.inf)

    # E_s[phi] decreases in the multiplier s; bracket then bisect
    lo, p_lo = 0.0, p
    hi = 1.0
    p_hi, n = _blahut_arimoto(W, hi, phi, p0=p, tol=tol)
    it += n
    while p_hi @ phi > gamma:
        lo, p_lo = hi, p_hi
        hi *= 2.0
        p_hi, n = _blahut_arimoto(W, hi, phi, p0=p_hi, tol=tol)
        it += n
        if hi > 1e12:
            break
    for _ in range(200):
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        pm, n = _blahut_arimoto(W, mid, phi, p0=p_hi, tol=tol)
        it += n
        if pm @ phi > gamma:
            lo, p_lo = mid, pm
        else:
            hi, p_hi = mid, pm
    # mixing the two sides meets the budget exactly; I is concave in p
    c_lo, c_hi = p_lo @ phi, p_hi @ phi
    lam = 0.0 if c_lo - c_hi < 1e-15 else (gamma - c_hi) / (c_lo - c_hi)
    lam = min(max(lam, 0.0), 1.0)
    p = lam * p_lo + (1 - lam) * p_hi
    return CapacityResult(channel_mutual_information(p, W), p, it, hi)


# ---------------------------------------------------------------------------
# sphere-packing exponent, dual (Gallager) form


def _e0_fixed(W, rho, Q):
    a = W ** (1.0 / (1.0 + rho))
    return -math.log2(np.sum((Q @ a) ** (1.0 + rho)))


def gallager_e0(ch: Dmc, rho: float, input_pmf=None, q0=None):
    """Gallager's E0 in bits. With no input PMF, maximize over it.

    Returns ``(value, input_pmf)``.
    """
    W = ch.P if isinstance(ch, Dmc) else np.asarray(ch, float)
    m = W.shape[0]
    if input_pmf is not None:
        Q = np.asarray(input_pmf, float)
        return _e0_fixed(W, rho, Q), Q
    if rho == 0.0:
        return 0.0, np.full(m, 1.0 / m)
    s = 1.0 + rho
    a = W ** (1.0 / s)

    def fun(Q):
        al = np.maximum(Q @ a, 1e-300)
        F = np.sum(al**s)
        return math.log(F), s * (a @ al**rho) / F

    start = np.full(m, 1.0 / m) if q0 is None else np.asarray(q0, float)
    res = minimize(
        fun,
        start,
        jac=True,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * m,
        constraints=[{"type": "eq", "fun": lambda Q: Q.sum() - 1.0, "jac": lambda Q: np.ones(m)}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    Q = np.clip(res.x, 0.0, None)
    Q /= Q.sum()
    val = _e0_fixed(W, rho, Q)
    # the uniform input is a cheap safeguard against a poor local exit
    u = np.full(m, 1.0 / m)
    vu = _e0_fixed(W, rho, u)
    if vu > val:
        return vu, u
    return val, Q


def r_infinity(ch: Dmc) -> float:
    """Rate below which the sphere-packing exponent is infinite (bits)."""
    W = ch.P
    support = (W > 0).astype(float)
    if support.all():
        return 0.0
    nx, ny = W.shape
    # min t  s.t.  sum_x Q(x) 1{W(y|x)>0} <= t for all y, Q in simplex
    c = np.r_[np.zeros(nx), 1.0]
    A_ub = np.c_[support.T, -np.ones(ny)]
    A_eq = np.r_[np.ones(nx), 0.0][None, :]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(ny), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * nx + [(0, None)], method="highs")
    return float(max(-math.log2(res.fun), 0.0))


def _e0_limit(W):
    """lim_{rho->inf} max_Q E0(rho, Q) for a channel without zero entries."""
    logW = np.log2(W)
    m = W.shape[0]

    def fun(Q):
        z = logW.T @ Q  # z[y] = sum_x Q(x) log2 W(y|x)
        mx = z.max()
        e = np.exp2(z - mx)
        S = e.sum()
        val = mx + math.log2(S)
        grad = logW @ (e / S)
        return val, grad

    res = minimize(
        fun,
        np.full(m, 1.0 / m),
        jac=True,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * m,
        constraints=[{"type": "eq", "fun": lambda Q: Q.sum() - 1.0, "jac": lambda Q: np.ones(m)}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    Q = np.clip(res.x, 0, None)
    Q /= Q.sum()
    return -fun(Q)[0], Q


@dataclass
class SpherePacking:
    value: float
    rho: float
    input_pmf: np.ndarray | None
    diagnostic: str = ""
    flags: list = field(default_factory=list)


def sphere_packing(ch: Dmc, R: float, rho_cap: float = 64.0, rho_limit: float = 2.0**20) -> SpherePacking:
    """E_sp(R) = sup_{rho>=0} [max_Q E0(rho, Q) - rho R], with diagnostics.

    ``rho_cap`` is the initial search interval; it is doubled while the
    optimum sits on its edge, up to ``rho_limit``. Rates below ``R_inf``
    give ``inf``.
    """
    if R < 0:
        raise ValidationError("rate must be nonnegative")
    W = ch.P
    C = capacity(ch).value
    if R >= C - 1e-12:
        return SpherePacking(0.0, 0.0, None, "rate at or above capacity")
    r_inf = r_infinity(ch)
    if R < r_inf - 1e-12:
        return SpherePacking(math.inf, math.inf, None, f"rate below R_inf={r_inf:.6g}")
    if R <= 1e-15 and r_inf == 0.0:
        val, Q = _e0_limit(W)
        return SpherePacking(max(val, 0.0), math.inf, Q, "zero-rate limit")

    cache: dict[float, tuple[float, np.ndarray]] = {}
    last_q = [None]

    def obj(rho):
        if rho not in cache:
            cache[rho] = gallager_e0(W, rho, q0=last_q[0])
            last_q[0] = cache[rho][1]
        return cache[rho][0] - rho * R

    cap = rho_cap
    flags = []
    while True:
        grid = np.r_[0.0, np.geomspace(1e-3, cap, 48)]
        vals = np.array([obj(r) for r in grid])
        k = int(np.argmax(vals))
        if k < len(grid) - 1 or cap >= rho_limit:
            break
        cap *= 8.0
    if k == len(grid) - 1:
        flags.append("optimum at rho search limit")
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    best_rho, best = grid[k], vals[k]
    if hi > lo:
        res = minimize_scalar(lambda r: -obj(r), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * max(1.0, hi)})
        if -res.fun > best:
            best_rho, best = float(res.x), float(-res.fun)
    Q = cache.get(best_rho, (None, None))[1]
    return SpherePacking(max(best, 0.0), best_rho, Q, "", flags)


def sphere_packing_exponent(ch: Dmc, R: float, **kw) -> float:
    """Sphere-packing exponent in bits; ``math.inf`` below ``R_inf``."""
    return sphere_packing(ch, R, **kw).value


# ---------------------------------------------------------------------------
# primal form: inf over test channels with I <= R of D(V||W|Q)


def _fixed_input_batch(W, Qs, R, iters=400, bisect=60):
    """min_{V: I(Q,V)<=R} D(V||W|Q) for a batch of input PMFs (nats inside).

    Blahut-style alternating minimization of D + lam*I, with the multiplier
    lam located by bisection on log(lam) so that I(Q, V_lam) = R.
    """
    Qs = np.atleast_2d(Qs)
    G = Qs.shape[0]
    R_nat = R * LN2
    pos = W > 0
    logW = np.where(pos, np.log(np.where(pos, W, 1.0)), -np.inf)

    def solve(lam, q):
        # lam: (G,), q: (G, ny)
        a = 1.0 / (1.0 + lam)[:, None, None]
        for _ in range(iters):
            with np.errstate(divide="ignore"):
                logq = np.log(q)
            z = a * (logW[None] + (lam[:, None, None] * logq[:, None, :]))
            z = np.where(pos[None], z, -np.inf)
            z -= z.max(axis=2, keepdims=True)
            V = np.exp(z)
            V /= V.sum(axis=2, keepdims=True)
            q_new = np.einsum("gx,gxy->gy", Qs, V)
            if np.max(np.abs(q_new - q)) < 1e-14:
                q = q_new
                break
            q = q_new
        return V, q

    def info_div(V):
        q = np.einsum("gx,gxy->gy", Qs, V)
        with np.errstate(divide="ignore", invalid="ignore"):
            ti = np.where(V > 0, V * np.log(V / q[:, None, :]), 0.0)
            td = np.where(V > 0, V * (np.log(np.where(V > 0, V, 1.0)) - np.where(pos, logW, 0.0)[None]), 0.0)
        I = np.einsum("gx,gx->g", Qs, ti.sum(axis=2))
        D = np.einsum("gx,gx->g", Qs, td.sum(axis=2))
        return I, D

    q0 = Qs @ W
    I0, _ = info_div(np.broadcast_to(W, (G,) + W.shape).copy())
    out = np.zeros(G)
    active = I0 > R_nat
    if not active.any():
        return out / LN2
    lo = np.full(G, -30.0)  # log lam
    hi = np.full(G, 30.0)
    q = q0.copy()
    V_best = None
    for _ in range(bisect):
        mid = 0.5 * (lo + hi)
        V, q = solve(np.exp(mid), q)
        I, D = info_div(V)
        above = I > R_nat
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    V, q = solve(np.exp(hi), q)
    I, D = info_div(V)
    # I(lam_hi) <= R; if even lam at the top could not reach R the set is empty
    D = np.where(I <= R_nat + 1e-9, D, np.inf)
    out = np.where(active, D, 0.0)
    return np.maximum(out, 0.0) / LN2


def _simplex_grid(m, step):
    k = int(round(1.0 / step))
    pts = [c for c in itertools.product(range(k + 1), repeat=m - 1) if sum(c) <= k]
    arr = np.array([list(c) + [k - sum(c)] for c in pts], dtype=float) / k
    return arr


def sphere_packing_primal(ch: Dmc, R: float, input_pmf=None, resolution: float = 0.05,
                          zoom_levels: int = 3, cap: int = 64) -> float:
    """Primal sphere-packing value, used as an independent check of the dual.

    With ``input_pmf`` the inner infimum is evaluated for that input only.
    Otherwise the supremum over inputs is taken on a simplex grid of the
    given resolution, refined by successive zooms around the best point.
    """
    W = ch.P
    nx, ny = W.shape
    if nx * ny > cap:
        raise ResourceCapError(f"|X||Y|={nx * ny} exceeds primal cap {cap}")
    if R >= math.log2(min(nx, ny)):
        return 0.0
    if input_pmf is not None:
        Q = np.asarray(input_pmf.p if isinstance(input_pmf, FinitePmf) else input_pmf, float)
        return float(_fixed_input_batch(W, Q[None], R)[0])

    grid = _simplex_grid(nx, resolution)
    vals = _fixed_input_batch(W, grid, R)
    best = int(np.argmax(vals))
    centre, bval = grid[best], vals[best]
    # zero-sum integer offsets spanning a small neighbourhood of the best point
    offs = np.array([list(c) + [-sum(c)] for c in itertools.product(range(-5, 6), repeat=nx - 1)],
                    dtype=float)
    step = resolution
    for _ in range(zoom_levels):
        if math.isinf(bval):
            break
        step /= 5.0
        cand = centre[None] + step * offs
        cand = cand[np.all(cand >= 0.0, axis=1)]
        cand /= cand.sum(axis=1, keepdims=True)
        v = _fixed_input_batch(W, cand, R)
        j = int(np.argmax(v))
        if v[j] > bval:
            centre, bval = cand[j], v[j]
    return float(bval)


# ---------------------------------------------------------------------------
# causal state information at the encoder


def strategy_channel(sch: StateChannel, cost: CostFunction | None = None, cap: int = 4096):
    """Derived DMC over Shannon strategies t: S -> X (and its derived cost)."""
    nx, ns = sch.nin, sch.nstates
    if nx**ns > cap:
        raise ResourceCapError(f"{nx}^{ns} strategies exceed cap {cap}")
    strategies = np.array(list(itertools.product(range(nx), repeat=ns)), dtype=int)
    P = np.einsum("s,tsy->ty", sch.ps, sch.P[strategies, np.arange(ns)[None, :], :])
    derived_cost = None
    if cost is not None:
        derived_cost = CostFunction(cost.phi[strategies] @ sch.ps, cost.budget)
    return Dmc(P), derived_cost, strategies


def causal_state_capacity(sch: StateChannel, cost: CostFunction | None = None, cap: int = 4096):
    """Capacity with causal state knowledge at the encoder, via Shannon strategies.

    Returns ``(value, strategy_pmf)``; the strategy table is available from
    :func:`strategy_channel`.
    """
    ch, dcost, _ = strategy_channel(sch, cost, cap)
    res = capacity(ch, dcost)
    return res.value, res.input_pmf
