"""Periodically time-varying finite-state encoder/decoder simulation.

Time runs i = 1..n and the phase is t = i mod ell, so tables are indexed by
t in 0..ell-1 with the first symbol using phase 1 % ell. The decoder output at
time i is the reconstruction of position i - d; the last d positions get the
fill symbol v0.

Trials are vectorized: the encoder is deterministic and runs once, channel
and side-information noise are drawn per trial from streams spawned off the
master seed, and the decoder recursion runs for all trials at once.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import Dmc, DistortionMeasure, SymbolSequence
from .errors import AlignmentError, ValidationError

__all__ = [
    "EncoderSpec",
    "DecoderSpec",
    "SimConfig",
    "McResult",
    "ExcessResult",
    "run_encoder",
    "sample_channel",
    "run_decoder",
    "simulate_trials",
    "monte_carlo_distortion",
    "monte_carlo_excess",
    "baseline_uncoded",
    "random_encoder",
    "random_decoder",
]


def _table(a, shape_len, name):
    a = np.array(a, dtype=np.int64)
    if a.ndim != shape_len:
        raise ValidationError(f"{name} table must have {shape_len} axes, got {a.ndim}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EncoderSpec:
    """x_i = out[t, u_i, z_i], z_{i+1} = nxt[t, u_i, z_i] with t = i mod ell.

    Tables have shape (ell, |U|, s_e).
    """

    out: np.ndarray
    nxt: np.ndarray
    nx: int
    z0: int = 0

    def __post_init__(self):
        out = _table(self.out, 3, "encoder output")
        nxt = _table(self.nxt, 3, "encoder next-state")
        if out.shape != nxt.shape:
            raise ValidationError("encoder tables must have equal shapes")
        if out.min() < 0 or out.max() >= self.nx:
            raise ValidationError("encoder output outside the channel input alphabet")
        if nxt.min() < 0 or nxt.max() >= out.shape[2] or not 0 <= self.z0 < out.shape[2]:
            raise ValidationError("encoder state outside range")
        object.__setattr__(self, "out", out)
        object.__setattr__(self, "nxt", nxt)

    @property
    def ell(self) -> int:
        return self.out.shape[0]

    @property
    def nu(self) -> int:
        return self.out.shape[1]

    @property
    def states(self) -> int:
        return self.out.shape[2]

    def to_dict(self) -> dict:
        return {"type": "encoder", "out": self.out.tolist(), "next": self.nxt.tolist(), "nx": self.nx,
                "z0": self.z0}

    @classmethod
    def from_dict(cls, d: dict) -> "EncoderSpec":
        return cls(d["out"], d["next"], int(d["nx"]), int(d.get("z0", 0)))


@dataclass(frozen=True, eq=False)
class DecoderSpec:
    """Output out[t, w_i, y_i, z_i] reconstructs position i - d.

    Tables have shape (ell, |W|, |Y|, s_d). Without side information use |W| = 1.
    """

    out: np.ndarray
    nxt: np.ndarray
    nv: int
    d: int = 0
    z0: int = 0
    v0: int = 0

    def __post_init__(self):
        out = _table(self.out, 4, "decoder output")
        nxt = _table(self.nxt, 4, "decoder next-state")
        if out.shape != nxt.shape:
            raise ValidationError("decoder tables must have equal shapes")
        if out.min() < 0 or out.max() >= self.nv or not 0 <= self.v0 < self.nv:
            raise ValidationError("decoder output outside the reconstruction alphabet")
        if nxt.min() < 0 or nxt.max() >= out.shape[3] or not 0 <= self.z0 < out.shape[3]:
            raise ValidationError("decoder state outside range")
        if self.d < 0:
            raise ValidationError("delay must be nonnegative")
        object.__setattr__(self, "out", out)
        object.__setattr__(self, "nxt", nxt)

    @property
    def ell(self) -> int:
        return self.out.shape[0]

    @property
    def nw(self) -> int:
        return self.out.shape[1]

    @property
    def ny(self) -> int:
        return self.out.shape[2]

    @property
    def states(self) -> int:
        return self.out.shape[3]

    def to_dict(self) -> dict:
        return {"type": "decoder", "out": self.out.tolist(), "next": self.nxt.tolist(), "nv": self.nv,
                "d": self.d, "z0": self.z0, "v0": self.v0}

    @classmethod
    def from_dict(cls, d: dict) -> "DecoderSpec":
        return cls(d["out"], d["next"], int(d["nv"]), int(d.get("d", 0)), int(d.get("z0", 0)),
                   int(d.get("v0", 0)))


def save_specs(path, enc: EncoderSpec, dec: DecoderSpec):
    with open(path, "w") as f:
        json.dump({"encoder": enc.to_dict(), "decoder": dec.to_dict()}, f, sort_keys=True)


def load_specs(path) -> tuple[EncoderSpec, DecoderSpec]:
    with open(path) as f:
        d = json.load(f)
    return EncoderSpec.from_dict(d["encoder"]), DecoderSpec.from_dict(d["decoder"])


@dataclass(frozen=True)
class SimConfig:
    trials: int = 200
    seed: int = 0
    confidence: float = 0.99

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("need at least one trial")
        if not 0 < self.confidence < 1:
            raise ValidationError("confidence must lie in (0, 1)")


def _syms(seq) -> np.ndarray:
    if isinstance(seq, SymbolSequence):
        return seq.symbols
    return np.asarray(seq, dtype=np.int64)


def _phases(n: int, ell: int) -> np.ndarray:
    return np.arange(1, n + 1) % ell


def run_encoder(enc: EncoderSpec, u) -> SymbolSequence:
    us = _syms(u)
    if us.size and (us.min() < 0 or us.max() >= enc.nu):
        raise ValidationError("source symbols outside the encoder's input alphabet")
    x = np.empty(us.size, dtype=np.int64)
    z = enc.z0
    out, nxt = enc.out, enc.nxt
    for i, (t, a) in enumerate(zip(_phases(us.size, enc.ell).tolist(), us.tolist())):
        x[i] = out[t, a, z]
        z = nxt[t, a, z]
    return SymbolSequence.from_list(x, enc.nx)


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _sample(P: np.ndarray, x: np.ndarray, r: np.ndarray) -> np.ndarray:
    cum = np.cumsum(P, axis=1)[:, :-1]
    return (r[..., None] >= cum[x]).sum(axis=-1)


def sample_channel(ch: Dmc, x, seed=0) -> SymbolSequence:
    """Pass ``x`` through ``ch`` with i.i.d. uses; equal seeds give equal outputs."""
    xs = _syms(x)
    if xs.size and (xs.min() < 0 or xs.max() >= ch.nin):
        raise ValidationError("channel inputs outside the channel alphabet")
    r = _generator(seed).random(xs.size)
    return SymbolSequence.from_list(_sample(ch.P, xs, r), ch.nout)


def _decode(dec: DecoderSpec, w: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Run the decoder on (trials, n) arrays."""
    T, n = y.shape
    d = dec.d
    v = np.full((T, n), dec.v0, dtype=np.int64)
    z = np.full(T, dec.z0, dtype=np.int64)
    out, nxt = dec.out, dec.nxt
    ph = _phases(n, dec.ell)
    for i in range(n):
        t = ph[i]
        wi, yi = w[:, i], y[:, i]
        if i >= d:
            v[:, i - d] = out[t, wi, yi, z]
        z = nxt[t, wi, yi, z]
    return v


def run_decoder(dec: DecoderSpec, w, y) -> SymbolSequence:
    ws, ys = _syms(w), _syms(y)
    if ws.size != ys.size:
        raise AlignmentError("side information and channel output lengths differ")
    if ys.size and (ys.max() >= dec.ny or ws.max() >= dec.nw or ys.min() < 0 or ws.min() < 0):
        raise ValidationError("decoder inputs outside the table domain")
    return SymbolSequence.from_list(_decode(dec, ws[None], ys[None])[0], dec.nv)


@dataclass(frozen=True)
class McResult:
    mean: float
    halfwidth: float
    trials: int
    seed: int
    confidence: float
    per_trial: np.ndarray = field(repr=False, default=None)

    def __iter__(self):
        yield self.mean
        yield self.halfwidth


@dataclass(frozen=True)
class ExcessResult:
    estimate: float
    low: float
    high: float
    successes: int
    trials: int
    seed: int
    confidence: float

    def __iter__(self):
        yield self.estimate
        yield (self.low, self.high)


def _check_shapes(enc, dec, u, ch, si, rho):
    if ch.nin != enc.nx or ch.nout != dec.ny:
        raise ValidationError("channel shape does not match the encoder/decoder")
    nw = 1 if si is None else si.nout
    if nw != dec.nw:
        raise ValidationError("side-information alphabet does not match the decoder")
    if si is not None and si.nin != enc.nu:
        raise ValidationError("side-information channel input must be the source alphabet")
    if rho is not None and rho.shape != (enc.nu, dec.nv):
        raise ValidationError("distortion table shape mismatch")
    if enc.ell != dec.ell:
        raise ValidationError("encoder and decoder periods differ")


def simulate_trials(enc: EncoderSpec, dec: DecoderSpec, u, ch: Dmc, si: Dmc | None,
                    trials: int, seed: int = 0):
    """Channel outputs, side information and reconstructions for every trial.

    Returns (x, y, w, v) with y, w, v of shape (trials, n).
    """
    us = _syms(u)
    _check_shapes(enc, dec, us, ch, si, None)
    x = run_encoder(enc, us).symbols
    n = us.size
    y = np.empty((trials, n), dtype=np.int64)
    w = np.zeros((trials, n), dtype=np.int64)
    for k, ss in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        s_ch, s_si = ss.spawn(2)
        y[k] = _sample(ch.P, x, np.random.default_rng(s_ch).random(n))
        if si is not None:
            w[k] = _sample(si.P, us, np.random.default_rng(s_si).random(n))
    v = _decode(dec, w, y)
    return x, y, w, v


def _trial_distortions(enc, dec, u, ch, si, rho, cfg) -> np.ndarray:
    rho = rho if isinstance(rho, DistortionMeasure) else DistortionMeasure(rho)
    us = _syms(u)
    _check_shapes(enc, dec, us, ch, si, rho)
    _, _, _, v = simulate_trials(enc, dec, us, ch, si, cfg.trials, cfg.seed)
    return rho.table[us[None, :], v].sum(axis=1)


def monte_carlo_distortion(enc: EncoderSpec, dec: DecoderSpec, u, ch: Dmc, si: Dmc | None, rho,
                           cfg: SimConfig = SimConfig()) -> McResult:
    """Mean per-symbol distortion over trials with a normal-approximation interval."""
    n = _syms(u).size
    per = _trial_distortions(enc, dec, u, ch, si, rho, cfg) / n
    mean = float(per.mean())
    if cfg.trials > 1:
        z = stats.norm.ppf(0.5 + cfg.confidence / 2)
        hw = float(z * per.std(ddof=1) / math.sqrt(cfg.trials))
    else:
        hw = math.inf
    return McResult(mean, hw, cfg.trials, cfg.seed, cfg.confidence, per)


def monte_carlo_excess(enc: EncoderSpec, dec: DecoderSpec, u, ch: Dmc, si: Dmc | None, rho, D: float,
                       cfg: SimConfig = SimConfig()) -> ExcessResult:
    """Fraction of trials whose total distortion reaches n D, with a Wilson interval."""
    n = _syms(u).size
    tot = _trial_distortions(enc, dec, u, ch, si, rho, cfg)
    k = int(np.sum(tot >= n * D - 1e-9))
    ci = stats.binomtest(k, cfg.trials).proportion_ci(confidence_level=cfg.confidence, method="wilson")
    return ExcessResult(k / cfg.trials, float(ci.low), float(ci.high), k, cfg.trials, cfg.seed, cfg.confidence)


# ---------------------------------------------------------------------------
# reference machines


def baseline_uncoded(ell: int = 1, nu: int = 2, nx: int | None = None, ny: int | None = None,
                     nv: int | None = None, u_to_x=None, y_to_v=None, nw: int = 1):
    """Single-state symbol-by-symbol encoder and decoder with zero delay."""
    nx = nu if nx is None else nx
    ny = nx if ny is None else ny
    nv = nu if nv is None else nv
    u_to_x = np.arange(nu) if u_to_x is None else np.asarray(u_to_x)
    y_to_v = np.arange(ny) if y_to_v is None else np.asarray(y_to_v)
    if u_to_x.size != nu or y_to_v.size != ny:
        raise ValidationError("symbol maps must cover the whole alphabet")
    if u_to_x.max() >= nx or y_to_v.max() >= nv:
        raise ValidationError("symbol maps leave the target alphabet")
    eo = np.broadcast_to(u_to_x[None, :, None], (ell, nu, 1))
    enc = EncoderSpec(eo, np.zeros_like(eo), nx)
    do = np.broadcast_to(y_to_v[None, None, :, None], (ell, nw, ny, 1))
    dec = DecoderSpec(do, np.zeros_like(do), nv)
    return enc, dec


def random_encoder(rng: np.random.Generator, ell: int, states: int, nu: int, nx: int) -> EncoderSpec:
    shape = (ell, nu, states)
    return EncoderSpec(rng.integers(0, nx, shape), rng.integers(0, states, shape), nx)


def random_decoder(rng: np.random.Generator, ell: int, states: int, d: int, nw: int, ny: int,
                   nv: int) -> DecoderSpec:
    shape = (ell, nw, ny, states)
    return DecoderSpec(rng.integers(0, nv, shape), rng.integers(0, states, shape), nv, d)
