"""Lower bounds on distortion and excess-distortion probability for finite-state systems.

Every report drops the asymptotically vanishing remainders and says so through
the ``asymptotic-terms-dropped`` flag.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import _fixed_input_batch, _simplex_grid, capacity, r_infinity, sphere_packing_exponent
from .core import Dmc, DistortionMeasure, FinitePmf, conditional_divergence, divergence, entropy
from .errors import InfeasibleError, ResourceCapError, ValidationError
from .ratedist import AUX_CAP, RdProblem, distortion_rate, rate_distortion, wyner_ziv_rd, wz_distortion_rate
from .report import ASYMPTOTIC_FLAG, BoundReport

__all__ = [
    "SystemParams",
    "BoundReport",
    "redundancy_delta1",
    "expected_distortion_bound",
    "excess_distortion_bound",
    "excess_exponent_corollary",
    "wz_excess_bound",
    "marton_exponent",
    "jscc_exponent_upper",
    "block_rate_distortion",
    "block_distortion_rate",
]

MAX_SUPER = 2**20


@dataclass(frozen=True)
class SystemParams:
    """Period, delay, state counts and sequence length of an encoder/decoder pair."""

    ell: int = 1
    d: int = 0
    s_e: int = 1
    s_d: int = 1
    n: int = 1
    mode: str = "asymptotic"

    def __post_init__(self):
        if self.ell < 1 or self.d < 0 or self.s_e < 1 or self.s_d < 1:
            raise ValidationError("need ell >= 1, d >= 0, s_e >= 1, s_d >= 1")
        if self.n < self.ell:
            raise ValidationError("sequence length must be at least the period")
        if self.mode not in ("asymptotic", "finite-n"):
            raise ValidationError("mode must be 'asymptotic' or 'finite-n'")


def redundancy_delta1(params: SystemParams, alpha: int, gamma: int) -> float:
    """s_e alpha^ell log2(gamma) / sqrt(n); zero in asymptotic mode."""
    if params.mode == "asymptotic":
        return 0.0
    if params.ell * math.log2(max(alpha, 1)) > 1000:
        raise ResourceCapError("alpha^ell overflows; use asymptotic mode")
    return params.s_e * float(alpha) ** params.ell * math.log2(gamma) / math.sqrt(params.n)


def _single(rho) -> DistortionMeasure:
    return rho if isinstance(rho, DistortionMeasure) else DistortionMeasure(rho)


def _check_block(source: FinitePmf, rho: DistortionMeasure, ell: int):
    k = rho.shape[0]
    if k**ell > MAX_SUPER:
        raise ResourceCapError(f"superalphabet {k}^{ell} exceeds cap")
    if source.size != k**ell:
        raise ValidationError(f"block PMF has {source.size} entries, expected {k}^{ell}")


def block_rate_distortion(source, rho, D: float, ell: int) -> float:
    """Per-symbol RDF of an ell-block PMF under the additive extension of ``rho``."""
    source, rho = _pmf(source), _single(rho)
    _check_block(source, rho, ell)
    return rate_distortion(source, rho.block(ell), ell * D) / ell


def block_distortion_rate(source, rho, R: float, ell: int) -> float:
    source, rho = _pmf(source), _single(rho)
    _check_block(source, rho, ell)
    return distortion_rate(source, rho.block(ell), ell * R) / ell


def _pmf(p) -> FinitePmf:
    return p if isinstance(p, FinitePmf) else FinitePmf(p)


def expected_distortion_bound(source, si: Dmc | None, C: float, rho, params: SystemParams,
                              gamma: int | None = None, restarts: int = 32, seed: int = 0) -> BoundReport:
    """Lower bound on the expected per-symbol distortion of any finite-state pair.

    D^WZ(C + log2(s_d)/ell + Delta1) - rho_max d / ell, clamped at zero. Without
    side information the ordinary distortion-rate function of the ell-block
    source is used. ``source`` is the ell-block empirical PMF.
    """
    if C < 0:
        raise ValidationError("capacity must be nonnegative")
    source, rho = _pmf(source), _single(rho)
    ell = params.ell
    _check_block(source, rho, ell)
    alpha = rho.shape[0]
    flags = [ASYMPTOTIC_FLAG]
    if params.mode == "finite-n":
        if gamma is None:
            raise ValidationError("finite-n mode needs the channel output alphabet size")
        delta1 = redundancy_delta1(params, alpha, gamma)
    else:
        delta1 = 0.0
    extra = math.log2(params.s_d) / ell
    arg = C + extra + delta1
    if si is None or (si.is_input_independent() if isinstance(si, Dmc) else False):
        dist = block_distortion_rate(source, rho, arg, ell)
        method = "ordinary"
    else:
        si = si if isinstance(si, Dmc) else Dmc(si)
        prob = RdProblem.blocks(source, rho, si, ell)
        if source.size + 1 > AUX_CAP:
            flags.append("aux-alphabet-capped")
        dist = wz_distortion_rate(prob, arg, restarts=restarts, seed=seed)
        method = "wyner-ziv"
    penalty = rho.rho_max * params.d / ell
    value = max(dist - penalty, 0.0)
    terms = {
        "capacity": C,
        "log_sd_over_ell": extra,
        "delta1": delta1,
        "rate_argument": arg,
        "distortion": dist,
        "delay_penalty": penalty,
        "method": method,
    }
    return BoundReport(value=value, kind="distortion", terms=terms, vacuous=value <= 0.0, flags=flags)


def excess_distortion_bound(source, ch: Dmc, D: float, lam: float, deltas, rho,
                            params: SystemParams) -> BoundReport:
    """sup over the Delta grid of Delta/(rho_max - D) 2^{-(n+d) E_sp[R(D+Delta) - lam]}.

    A grid point whose exponent argument is not positive contributes nothing
    (recorded with an infinite exponent). ``source`` is the ell-block PMF and
    R the per-symbol ell-block rate-distortion function.
    """
    source, rho = _pmf(source), _single(rho)
    ell = params.ell
    _check_block(source, rho, ell)
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    if deltas.size == 0:
        raise ValidationError("empty Delta grid")
    rmax = rho.rho_max
    if not D < rmax:
        raise ValidationError("D must be below rho_max")
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    blocklength = params.n + params.d
    rows = []
    best = (0.0, None, math.inf, 0.0)
    for dl in deltas:
        if dl <= 0 or dl > rmax - D:
            raise ValidationError("each Delta must lie in (0, rho_max - D]")
        pref = dl / (rmax - D)
        R = block_rate_distortion(source, rho, D + dl, ell)
        arg = R - lam
        E = sphere_packing_exponent(ch, arg) if arg > 0 else math.inf
        p = 0.0 if math.isinf(E) else pref * 2.0 ** (-blocklength * E)
        rows.append({"delta": float(dl), "rate": R, "argument": arg, "exponent": E, "prefactor": pref,
                     "bound": p})
        if p > best[0] or best[1] is None:
            best = (p, float(dl), E, pref)
    value, bd, E, pref = best
    terms = {
        "prefactor": pref,
        "exponent": E,
        "blocklength": blocklength,
        "best_delta": bd,
        "lambda": lam,
        "grid": rows,
    }
    return BoundReport(value=value, kind="probability", terms=terms, vacuous=value <= 0.0,
                       flags=[ASYMPTOTIC_FLAG])


def excess_exponent_corollary(source, ch: Dmc, D: float, zeta: float, rho, ell: int = 1) -> BoundReport:
    """Exponent E_sp[R(D+0) - zeta]; an infinite exponent marks a vacuous bound.

    R(D+0) is taken as the last of R(D + 10^-k), k = 2..9. When the argument is
    not positive no exponential lower bound follows.
    """
    source, rho = _pmf(source), _single(rho)
    _check_block(source, rho, ell)
    seq = [block_rate_distortion(source, rho, D + 10.0**-k, ell) for k in range(2, 10)]
    R0 = seq[-1]
    arg = R0 - zeta
    E = sphere_packing_exponent(ch, arg) if arg > 0 else math.inf
    terms = {"exponent": E, "rate_right_limit": R0, "rate_sequence": seq, "zeta": zeta, "argument": arg}
    return BoundReport(value=E, kind="exponent", terms=terms, vacuous=math.isinf(E), flags=[ASYMPTOTIC_FLAG])


# ---------------------------------------------------------------------------
# side-information excess bound


def wz_excess_bound(source, si: Dmc, ch: Dmc, D: float, delta: float, rho, params: SystemParams,
                    resolution: float = 0.1, gamma: int | None = None, restarts: int = 8,
                    seed: int = 0, cap: int = 2000) -> BoundReport:
    """Excess-distortion lower bound with a change of measure on both channels.

    For every input PMF Q_X on a simplex grid, the exponent is the minimum over
    side channels Q_{W|U} on a grid (always including the true one) of
    D(Q_{W|U}||P_{W|U}|P_U) plus the smallest D(Q_{Y|X}||P_{Y|X}|Q_X) over
    channels with I_Q(X;Y) <= R^WZ_Q(D') - log2(s_d)/ell - Delta1, where
    D' = D + rho_max d / ell + Delta. The channel part is solved exactly for each
    Q_X. The bound uses the largest exponent over Q_X.
    """
    source, rho = _pmf(source), _single(rho)
    si = si if isinstance(si, Dmc) else Dmc(si)
    ell = params.ell
    _check_block(source, rho, ell)
    rmax = rho.rho_max
    if not D < rmax or not 0 < delta <= rmax - D:
        raise ValidationError("need D < rho_max and 0 < Delta <= rho_max - D")
    alpha = rho.shape[0]
    delta1 = 0.0
    if params.mode == "finite-n":
        if gamma is None:
            raise ValidationError("finite-n mode needs the channel output alphabet size")
        delta1 = redundancy_delta1(params, alpha, gamma)
    extra = math.log2(params.s_d) / ell + delta1
    Dp = D + rmax * params.d / ell + delta
    P_wu = si.power(ell)
    nu, nw = P_wu.P.shape
    rows = _simplex_grid(nw, resolution)
    count = len(rows) ** nu
    if count > cap:
        raise ResourceCapError(f"{count} side-channel grid points exceed cap {cap}")
    ps = source.p
    cands = []
    for c in itertools.product(rows, repeat=nu):
        Q = np.array(c)
        div_w = conditional_divergence(Dmc(Q), P_wu, ps)
        if not math.isinf(div_w):
            cands.append((div_w, Q))
    # the true side channel first, then by increasing divergence
    cands.sort(key=lambda x: x[0])
    cands.insert(0, (0.0, P_wu.P))
    qx = _simplex_grid(ch.nin, resolution)
    W = ch.P
    exps = np.full(len(qx), math.inf)
    best_pair = [None] * len(qx)
    evaluated = 0
    # the Wyner-Ziv rate never exceeds H(U^ell)/ell, so a larger offset leaves nothing feasible
    if extra > entropy(ps) / ell:
        cands = []
    for div_w, Q in cands:
        # a candidate cannot lower any minimum once its divergence alone reaches the maximum
        if div_w >= exps.max():
            break
        prob = RdProblem(source, rho.block(ell), Dmc(Q), ell)
        Dmin = float(ps @ prob.rho.table.min(axis=1)) / ell
        if Dp < Dmin:
            continue
        r = wyner_ziv_rd(prob, Dp, restarts=restarts, seed=seed).rate
        evaluated += 1
        t = r - extra
        if t < 0:
            continue
        tot = div_w + _fixed_input_batch(W, qx, t)
        better = tot < exps
        exps = np.where(better, tot, exps)
        for k in np.flatnonzero(better):
            best_pair[k] = Q
    k = int(np.argmax(exps))
    E = float(exps[k])
    pref = delta / (rmax - D)
    blocklength = params.n + params.d
    value = 0.0 if math.isinf(E) else pref * 2.0 ** (-blocklength * E)
    terms = {
        "prefactor": pref,
        "exponent": E,
        "blocklength": blocklength,
        "delta": delta,
        "distortion_argument": Dp,
        "rate_offset": extra,
        "input_pmf": qx[k],
        "side_channel": None if best_pair[k] is None else best_pair[k],
        "grid_points": len(cands),
        "evaluated": evaluated,
    }
    return BoundReport(value=value, kind="probability", terms=terms, vacuous=value <= 0.0,
                       flags=[ASYMPTOTIC_FLAG, "grid-search"])


# ---------------------------------------------------------------------------
# source-coding and joint exponents


def _rq(Q, rho, D) -> float:
    try:
        return rate_distortion(Q, rho, D)
    except InfeasibleError:
        return math.inf


def _default_resolution(m: int) -> float:
    return {1: 1.0, 2: 0.02, 3: 0.05}.get(m, 0.1)


def _support_grid(p: np.ndarray, resolution: float) -> np.ndarray:
    g = _simplex_grid(p.size, resolution)
    return g[np.all((g == 0) | (p > 0), axis=1)]


def marton_exponent(p, rho, D: float, R: float, resolution: float | None = None,
                    bisect: int = 32) -> float:
    """min D(Q||P) over source PMFs Q with R_Q(D) >= R (bits); inf when no Q qualifies.

    The feasible set is convex because R_Q(D) is concave in Q, so the minimizer
    lies on its boundary along the segment from P. Candidate directions come
    from a simplex grid; the boundary is located by bisection on each segment.
    """
    p, rho = _pmf(p).p, _single(rho)
    if R < 0:
        raise ValidationError("rate must be nonnegative")
    if R > math.log2(p.size) + 1e-12:
        return math.inf
    if _rq(p, rho, D) >= R - 1e-12:
        return 0.0
    res = _default_resolution(p.size) if resolution is None else resolution
    grid = _support_grid(p, res)
    vals = np.array([_rq(q, rho, D) for q in grid])
    feas = np.flatnonzero(vals >= R)
    if feas.size == 0:
        return math.inf
    divs = np.array([divergence(grid[i], p) for i in feas])
    order = feas[np.argsort(divs, kind="stable")[:2]]
    best = math.inf
    for i in order:
        q1 = grid[i]
        lo, hi = 0.0, 1.0
        for _ in range(bisect):
            mid = 0.5 * (lo + hi)
            if _rq(p + mid * (q1 - p), rho, D) >= R:
                hi = mid
            else:
                lo = mid
        best = min(best, divergence(p + hi * (q1 - p), p))
    return float(best)


def jscc_exponent_upper(p, rho, D: float, ch: Dmc, resolution: float | None = None) -> float:
    """min over R of [Marton exponent F(R) + E_sp(R)] (bits).

    Since E_sp is nonincreasing, for each source PMF Q the best rate is
    min(R_Q(D), C), so the value equals min over Q of D(Q||P) + E_sp(min(R_Q(D), C)).
    The search runs on a simplex grid followed by local refinement.
    """
    p, rho = _pmf(p).p, _single(rho)
    C = capacity(ch).value
    if _rq(p, rho, D) >= C - 1e-12:
        return 0.0
    cache: dict = {}

    def obj(q):
        key = tuple(np.round(q, 14))
        if key not in cache:
            dv = divergence(q, p)
            if math.isinf(dv):
                cache[key] = math.inf
            else:
                r = _rq(q, rho, D)
                e = 0.0 if r >= C else sphere_packing_exponent(ch, r)
                cache[key] = dv + e
        return cache[key]

    res = _default_resolution(p.size) if resolution is None else resolution
    grid = _support_grid(p, res)
    vals = np.array([obj(q) for q in grid])
    k = int(np.argmin(vals))
    best, centre = float(vals[k]), grid[k]
    if p.size == 2:
        lo, hi = max(centre[0] - res, 0.0), min(centre[0] + res, 1.0)
        r = minimize_scalar(lambda a: obj(np.array([a, 1 - a])), bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-9})
        best = min(best, float(r.fun))
    else:
        offs = np.array([list(c) + [-sum(c)] for c in itertools.product(range(-2, 3), repeat=p.size - 1)],
                        dtype=float)
        step = res
        for _ in range(3):
            step /= 4.0
            cand = centre[None] + step * offs
            cand = cand[np.all(cand >= 0, axis=1)]
            v = np.array([obj(q) for q in cand])
            j = int(np.argmin(v))
            if v[j] < best:
                best, centre = float(v[j]), cand[j]
    return best
