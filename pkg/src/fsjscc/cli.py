"""Command-line front end.

Exit status: 0 on success, 1 when the result is vacuous or infeasible (the
output file is still written and flagged), 2 on usage, validation or I/O
errors (nothing is written).
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys

import numpy as np

from . import __version__
from .bounds import SystemParams, excess_distortion_bound, expected_distortion_bound, redundancy_delta1
from .channels import CostFunction, StateChannel, capacity, causal_state_capacity, sphere_packing_exponent
from .core import Dmc, DistortionMeasure, FinitePmf, JointPmf, block_empirical
from .errors import FsjsccError, InfeasibleError
from .io import read_array, read_json, read_sequence, write_atomic
from .lzmaxent import DifferenceDistortion, two_sided_si_bound
from .ratedist import (
    RdProblem,
    common_reconstruction_rd,
    conditional_rate_distortion,
    distortion_rate,
    rate_distortion,
    wz_curve,
)
from .report import _plain
from .simfsm import SimConfig, load_specs, monte_carlo_distortion, monte_carlo_excess

TOOL = "fsjscc"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _floats(text) -> list[float]:
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        a, b, k = text.split(":")
        return [float(x) for x in np.linspace(float(a), float(b), int(k))]
    return [float(x) for x in text.split(",") if x.strip()]


def _channel(args, prefix="") -> Dmc | None:
    path = getattr(args, f"{prefix}channel", None)
    p = getattr(args, f"{prefix}bsc", None)
    if path:
        return Dmc(read_array(path))
    if p is not None:
        return Dmc.bsc(float(p))
    return None


def _require_channel(args) -> Dmc:
    ch = _channel(args)
    if ch is None:
        raise UsageError("a channel is required (--channel FILE or --bsc P)")
    return ch


def _source(args, path=None):
    path = path or args.source
    if not path:
        raise UsageError("a source sequence is required (--source FILE)")
    return read_sequence(path, labels=args.labels, size=args.alphabet_size)


def _distortion(args, k: int) -> DistortionMeasure:
    if args.distortion:
        return DistortionMeasure(read_array(args.distortion))
    return DistortionMeasure.hamming(k)


def _source_pmf(args) -> tuple[FinitePmf, int]:
    """Source PMF and single-letter alphabet size from --pmf or --source (+ --ell)."""
    if args.pmf:
        p = FinitePmf(read_array(args.pmf))
        k = args.alphabet_size or round(p.size ** (1.0 / args.ell))
        return p, int(k)
    seq = _source(args)
    return block_empirical(seq, args.ell), seq.alphabet.size


def _params(args, n: int) -> SystemParams:
    return SystemParams(ell=args.ell, d=args.d, s_e=args.se, s_d=args.sd, n=n, mode=args.mode)


# ---------------------------------------------------------------------------
# commands; each returns (payload, format, vacuous)


def cmd_bound_expected(args):
    ch = _require_channel(args)
    seq = _source(args)
    si = _channel(args, "si_")
    rho = _distortion(args, seq.alphabet.size)
    pu = block_empirical(seq, args.ell)
    C = capacity(ch).value
    rep = expected_distortion_bound(pu, si, C, rho, _params(args, len(seq)), gamma=ch.nout,
                                    restarts=args.restarts, seed=args.seed)
    return {"capacity": C, "report": rep.to_dict(), "block_pmf": pu.p}, "json", rep.vacuous


def cmd_bound_excess(args):
    ch = _require_channel(args)
    seq = _source(args)
    deltas = _floats(args.deltas)
    if not deltas:
        raise UsageError("empty Delta grid")
    if args.D is None:
        raise UsageError("--D is required")
    rho = _distortion(args, seq.alphabet.size)
    params = _params(args, len(seq))
    if args.lam is None:
        lam = math.log2(args.sd) / args.ell + (
            redundancy_delta1(params, seq.alphabet.size, ch.nout) if args.mode == "finite-n" else 0.0)
    else:
        lam = args.lam
    rep = excess_distortion_bound(block_empirical(seq, args.ell), ch, args.D, lam, deltas, rho, params)
    cols = ["delta", "rate", "argument", "exponent", "prefactor", "bound"]
    rows = [[r[c] for c in cols] for r in rep.terms["grid"]]
    return {"columns": cols, "rows": rows}, "csv", rep.vacuous


def cmd_simulate(args):
    if not args.specs:
        raise UsageError("--specs FILE is required")
    enc, dec = load_specs(args.specs)
    ch = _require_channel(args)
    si = _channel(args, "si_")
    seq = _source(args)
    rho = _distortion(args, seq.alphabet.size)
    cfg = SimConfig(args.trials, args.seed, args.confidence)
    mc = monte_carlo_distortion(enc, dec, seq, ch, si, rho, cfg)
    params = SystemParams(ell=enc.ell, d=dec.d, s_e=enc.states, s_d=dec.states, n=len(seq), mode=args.mode)
    bound = expected_distortion_bound(block_empirical(seq, enc.ell), si, capacity(ch).value, rho, params,
                                      gamma=ch.nout, restarts=args.restarts, seed=args.seed)
    out = {
        "distortion": {"mean": mc.mean, "halfwidth": mc.halfwidth, "trials": mc.trials,
                       "confidence": mc.confidence, "seed": mc.seed},
        "bound": bound.to_dict(),
        "consistent": mc.mean + mc.halfwidth >= bound.value,
    }
    if args.D is not None:
        ex = monte_carlo_excess(enc, dec, seq, ch, si, rho, args.D, cfg)
        out["excess"] = {"estimate": ex.estimate, "low": ex.low, "high": ex.high, "successes": ex.successes}
    return out, "json", False


def cmd_lz(args):
    if not args.u or not args.w:
        raise UsageError("--u and --w files are required")
    u = _source(args, args.u)
    w = read_sequence(args.w, labels=args.w_labels, size=args.w_alphabet_size)
    dd = DifferenceDistortion(_floats(args.varrho)) if args.varrho else DifferenceDistortion.hamming(
        u.alphabet.size)
    rep = two_sided_si_bound(u, w, args.capacity, dd, eta=args.eta, d=args.d, ell=args.ell, q=args.q)
    t = rep.terms
    return {"c_w": t["c_w"], "c_total": t["c_total"], "c_histogram": t["c_histogram"],
            "complexity": t["lz_complexity"], "report": rep.to_dict()}, "json", rep.vacuous


def cmd_rdf(args):
    p, k = _source_pmf(args)
    rho = _distortion(args, k)
    if args.ell > 1:
        rho = rho.block(args.ell)
    ell = args.ell
    out = {"ell": ell}
    if args.si_channel or args.si_bsc is not None:
        si = _channel(args, "si_").power(ell)
        joint = JointPmf(p.p[:, None] * si.P)
        out["conditional"] = [{"D": D, "rate": conditional_rate_distortion(joint, rho, ell * D) / ell}
                              for D in _floats(args.D)]
    out["rate"] = [{"D": D, "rate": rate_distortion(p, rho, ell * D) / ell} for D in _floats(args.D)]
    out["distortion"] = [{"R": R, "distortion": distortion_rate(p, rho, ell * R) / ell} for R in _floats(args.R)]
    return out, "json", False


def _wz_problem(args):
    p, k = _source_pmf(args)
    si = _channel(args, "si_")
    if si is None:
        raise UsageError("side information is required (--si-channel FILE or --si-bsc P)")
    rho = _distortion(args, k)
    return RdProblem.blocks(p, rho, si, args.ell)


def cmd_wz_rdf(args):
    prob = _wz_problem(args)
    Ds = _floats(args.D)
    sols = wz_curve(prob, Ds, restarts=args.restarts, seed=args.seed)
    rows = []
    for D, s in zip(Ds, sols):
        row = {"D": D, "rate": s.rate, "achieved_distortion": s.distortion, "test_channel": s.test_channel,
               "decoder": s.decoder, "diagnostics": s.diagnostics}
        if args.compare:
            row["common_reconstruction"] = common_reconstruction_rd(prob, D, seed=args.seed)
            row["ordinary"] = rate_distortion(prob.source, prob.rho, prob.ell * D) / prob.ell
        rows.append(row)
    return {"solutions": rows}, "json", False


def _cost(args):
    if args.cost is None:
        return None
    if args.budget is None:
        raise UsageError("--budget is required with --cost")
    return CostFunction(_floats(args.cost), args.budget)


def cmd_capacity(args):
    ch = _require_channel(args)
    res = capacity(ch, _cost(args))
    return {"capacity": res.value, "input_pmf": res.input_pmf, "multiplier": res.multiplier}, "json", False


def cmd_causal_capacity(args):
    if not args.state_channel:
        raise UsageError("--state-channel FILE is required")
    spec = read_json(args.state_channel)
    sch = StateChannel(np.asarray(spec["P"], dtype=float), np.asarray(spec["ps"], dtype=float))
    value, pmf = causal_state_capacity(sch, _cost(args))
    return {"capacity": value, "strategy_pmf": pmf, "state_blind_capacity": capacity(sch.averaged()).value}, \
        "json", False


def cmd_sweep(args):
    grid = _floats(args.grid)
    if not grid:
        raise UsageError("--grid is required (list or start:stop:num)")
    kind = args.kind
    if kind == "esp":
        ch = _require_channel(args)
        return {"columns": ["R", "esp"], "rows": [[R, sphere_packing_exponent(ch, R)] for R in grid]}, "csv", False
    if kind == "capacity-cost":
        ch = _require_channel(args)
        phi = _floats(args.cost)
        if not phi:
            raise UsageError("--cost is required for a capacity-cost sweep")
        rows = [[G, capacity(ch, CostFunction(phi, G)).value] for G in grid]
        return {"columns": ["budget", "capacity"], "rows": rows}, "csv", False
    if kind in ("wz", "cr"):
        prob = _wz_problem(args)
        if kind == "wz":
            sols = wz_curve(prob, grid, restarts=args.restarts, seed=args.seed)
            rows = [[D, s.rate, s.distortion] for D, s in zip(grid, sols)]
        else:
            sols = wz_curve(prob, grid, common=True, seed=args.seed)
            rows = [[D, s.rate, s.distortion] for D, s in zip(grid, sols)]
        return {"columns": ["D", "rate", "achieved_distortion"], "rows": rows}, "csv", False
    p, k = _source_pmf(args)
    rho = _distortion(args, k)
    ell = args.ell
    if ell > 1:
        rho = rho.block(ell)
    if kind == "rd":
        rows = [[D, rate_distortion(p, rho, ell * D) / ell] for D in grid]
        return {"columns": ["D", "rate"], "rows": rows}, "csv", False
    if kind == "dr":
        rows = [[R, distortion_rate(p, rho, ell * R) / ell] for R in grid]
        return {"columns": ["R", "distortion"], "rows": rows}, "csv", False
    raise UsageError(f"unknown sweep kind {kind!r}")


COMMANDS = {
    "bound-expected": cmd_bound_expected,
    "bound-excess": cmd_bound_excess,
    "simulate": cmd_simulate,
    "lz": cmd_lz,
    "rdf": cmd_rdf,
    "wz-rdf": cmd_wz_rdf,
    "capacity": cmd_capacity,
    "causal-capacity": cmd_causal_capacity,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# parser and output


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="JSON file whose keys override command-line flags")
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--source", help="source sequence file")
    g.add_argument("--labels", help="alphabet labels, one character per symbol (e.g. 01)")
    g.add_argument("--alphabet-size", type=int, help="source alphabet size for integer files")
    g.add_argument("--pmf", help="source PMF file (over ell-blocks when --ell > 1)")
    g.add_argument("--channel", help="channel matrix file, rows P(y|x)")
    g.add_argument("--bsc", type=float, help="binary symmetric channel crossover")
    g.add_argument("--si-channel", help="side-information channel matrix file, rows P(w|u)")
    g.add_argument("--si-bsc", type=float, help="binary symmetric side-information crossover")
    g.add_argument("--distortion", help="distortion table file (default Hamming)")
    g.add_argument("--ell", type=int, default=1, help="period / block length (default 1)")
    g.add_argument("--d", type=int, default=0, help="decoding delay (default 0)")
    g.add_argument("--se", type=int, default=1, help="encoder states (default 1)")
    g.add_argument("--sd", type=int, default=1, help="decoder states (default 1)")
    g.add_argument("--mode", choices=["asymptotic", "finite-n"], default="asymptotic")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--restarts", type=int, default=32, help="random restarts of the Wyner-Ziv solver")

    ap = argparse.ArgumentParser(prog=TOOL, description="Distortion bounds for finite-state joint "
                                 "source-channel coding of individual sequences.")
    ap.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bound-expected", parents=[common], help="expected-distortion lower bound")
    sp = sub.add_parser("bound-excess", parents=[common], help="excess-distortion probability bound (CSV)")
    sp.add_argument("--D", type=float)
    sp.add_argument("--lam", type=float, help="rate offset (default log2(sd)/ell + Delta1)")
    sp.add_argument("--deltas", default="", help="Delta grid: list or start:stop:num")

    sp = sub.add_parser("simulate", parents=[common], help="Monte-Carlo run of FSM specs")
    sp.add_argument("--specs", help="JSON file with encoder and decoder tables")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--confidence", type=float, default=0.99)
    sp.add_argument("--D", type=float, help="also estimate the excess-distortion probability at D")

    sp = sub.add_parser("lz", parents=[common], help="conditional LZ complexity and bound")
    sp.add_argument("--u", help="source sequence file")
    sp.add_argument("--w", help="side-information sequence file")
    sp.add_argument("--w-labels")
    sp.add_argument("--w-alphabet-size", type=int)
    sp.add_argument("--capacity", type=float, default=0.0)
    sp.add_argument("--eta", type=float, default=0.0)
    sp.add_argument("--q", type=float)
    sp.add_argument("--varrho", help="difference distortion values varrho(0),...,varrho(alpha-1)")

    sp = sub.add_parser("rdf", parents=[common], help="rate-distortion and distortion-rate values")
    sp.add_argument("--D", default="")
    sp.add_argument("--R", default="")

    sp = sub.add_parser("wz-rdf", parents=[common], help="Wyner-Ziv rate-distortion solutions")
    sp.add_argument("--D", default="")
    sp.add_argument("--compare", action="store_true", help="also report common-reconstruction and ordinary")

    sp = sub.add_parser("capacity", parents=[common], help="channel capacity")
    sp.add_argument("--cost", help="per-input cost values")
    sp.add_argument("--budget", type=float)

    sp = sub.add_parser("causal-capacity", parents=[common], help="capacity with causal state information")
    sp.add_argument("--state-channel", help='JSON {"P": [x][s][y], "ps": [...]}')
    sp.add_argument("--cost")
    sp.add_argument("--budget", type=float)

    sp = sub.add_parser("sweep", parents=[common], help="CSV sweeps")
    sp.add_argument("--kind", required=True, choices=["rd", "dr", "wz", "cr", "esp", "capacity-cost"])
    sp.add_argument("--grid", default="")
    sp.add_argument("--cost")
    return ap


def _apply_config(args, parser):
    if not args.config:
        return args
    cfg = read_json(args.config)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("command", "config"):
            continue
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        setattr(args, dest, value)
    return args


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}


def _render(args, payload, fmt) -> str:
    if fmt == "json":
        doc = {"tool": TOOL, "version": __version__, "command": args.command, "config": _echo(args), **payload}
        return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"
    buf = _io.StringIO()
    buf.write(f"# {TOOL} {__version__} {args.command}\n")
    buf.write("# config " + json.dumps(_plain(_echo(args)), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(payload["columns"])
    for row in payload["rows"]:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args = _apply_config(args, parser)
        payload, fmt, vacuous = COMMANDS[args.command](args)
        text = _render(args, payload, fmt)
    except InfeasibleError as e:
        print(f"{TOOL}: infeasible: {e}", file=sys.stderr)
        return 1
    except (UsageError, FsjsccError, OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"{TOOL}: error: {e}", file=sys.stderr)
        return 2
    if args.out:
        try:
            write_atomic(args.out, text)
        except OSError as e:
            print(f"{TOOL}: error: {e}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 1 if vacuous else 0


if __name__ == "__main__":
    sys.exit(main())
