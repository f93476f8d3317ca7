"""Property tests for the invariants of each module."""
import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from fsjscc.bounds import SystemParams, expected_distortion_bound
from fsjscc.channels import CostFunction, StateChannel, capacity, causal_state_capacity, sphere_packing_exponent
from fsjscc.core import (
    DistortionMeasure,
    Dmc,
    FinitePmf,
    JointPmf,
    SymbolSequence,
    average_distortion,
    block_empirical,
)
from fsjscc.lzmaxent import DifferenceDistortion, conditional_lz_complexity, joint_parse, phi, psi
from fsjscc.ratedist import (
    RdProblem,
    common_reconstruction_rd,
    conditional_rate_distortion,
    distortion_rate,
    rate_distortion,
    wyner_ziv_rd,
)
from fsjscc.simfsm import random_decoder, random_encoder, run_decoder, run_encoder, simulate_trials

from oracles import ba_point

FAST = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
SLOW = settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])

seeds = st.integers(0, 2**32 - 1)


def rand_pmf(rng, k, floor=0.0):
    p = rng.dirichlet(np.ones(k)) + floor
    return p / p.sum()


def rand_channel(rng, a, b, floor=0.0):
    return Dmc(np.array([rand_pmf(rng, b, floor) for _ in range(a)]))


# ---------------------------------------------------------------------------
# core


@FAST
@given(seeds, st.integers(2, 4), st.integers(2, 4))
def test_joint_pmf_chain_rule_and_normalization(seed, a, b):
    rng = np.random.default_rng(seed)
    j = JointPmf(rng.dirichlet(np.ones(a * b)).reshape(a, b))
    assert abs(j.p.sum() - 1) <= 1e-12
    assert abs(j.entropy() - (j.entropy((0,)) + j.conditional_entropy((1,), (0,)))) <= 1e-10
    pa, pb = j.marginal((0,)).p, j.marginal((1,)).p
    indep = JointPmf(np.outer(pa, pb))
    assert np.allclose(indep.marginal((0,)).p, pa, atol=1e-15, rtol=0)
    assert abs(indep.mutual_information(0, 1)) <= 1e-12


@FAST
@given(seeds, st.integers(1, 5), st.integers(1, 6))
def test_periodic_sequence_gives_point_mass(seed, ell, reps):
    rng = np.random.default_rng(seed)
    block = rng.integers(0, 3, ell)
    s = SymbolSequence.from_list(np.tile(block, reps), 3)
    p = block_empirical(s, ell).p
    assert p.max() == 1.0


@FAST
@given(seeds, st.integers(1, 60))
def test_average_distortion_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    rho = DistortionMeasure(rng.random((3, 2)))
    u, v = rng.integers(0, 3, n), rng.integers(0, 2, n)
    perm = rng.permutation(n)
    a = average_distortion(SymbolSequence.from_list(u, 3), SymbolSequence.from_list(v, 2), rho)
    b = average_distortion(SymbolSequence.from_list(u[perm], 3), SymbolSequence.from_list(v[perm], 2), rho)
    assert abs(a - b) <= 1e-12


# ---------------------------------------------------------------------------
# channels


@FAST
@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_capacity_cost_monotone_concave(seed, a, b):
    rng = np.random.default_rng(seed)
    ch = rand_channel(rng, a, b)
    phi_ = rng.random(a)
    grid = np.linspace(phi_.min(), phi_.max(), 20)
    vals = np.array([capacity(ch, CostFunction(phi_, G)).value for G in grid])
    assert np.all(np.diff(vals) >= -1e-8)
    assert np.all(vals[1:-1] >= 0.5 * (vals[:-2] + vals[2:]) - 1e-7)


@FAST
@given(seeds, st.integers(2, 3))
def test_sphere_packing_shape(seed, k):
    rng = np.random.default_rng(seed)
    ch = rand_channel(rng, k, k, floor=0.05)
    C = capacity(ch).value
    assume(C > 0.02)
    assert sphere_packing_exponent(ch, C) <= 1e-6
    assert sphere_packing_exponent(ch, C + 0.05) == 0.0
    Rs = np.linspace(0.1 * C, C, 9)
    E = np.array([sphere_packing_exponent(ch, R) for R in Rs])
    assert np.all(np.diff(E) <= 1e-7)
    assert np.all(E[1:-1] <= 0.5 * (E[:-2] + E[2:]) + 1e-6)


@FAST
@given(seeds, st.integers(2, 3), st.integers(2, 3))
def test_causal_capacity_dominates_state_blind(seed, nx, ns):
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(2), size=(nx, ns))
    sch = StateChannel(P, rand_pmf(rng, ns))
    value, _ = causal_state_capacity(sch)
    assert value >= capacity(sch.averaged()).value - 1e-8


# ---------------------------------------------------------------------------
# rate distortion


@FAST
@given(seeds, st.integers(2, 4), st.integers(2, 3), st.floats(0.05, 20.0))
def test_rate_distortion_matches_parametric_points(seed, a, b, s):
    rng = np.random.default_rng(seed)
    p = rand_pmf(rng, a, 0.02)
    d = rng.random((a, b))
    D, R = ba_point(p, d, s)
    val = rate_distortion(p, DistortionMeasure(d), D)
    assert val <= R + 1e-9
    assert val >= R - 1e-5


@FAST
@given(seeds, st.integers(2, 4))
def test_rate_distortion_convex_and_inverse(seed, a):
    rng = np.random.default_rng(seed)
    p = rand_pmf(rng, a, 0.02)
    rho = DistortionMeasure(rng.random((a, a)))
    dmin = float(p @ rho.table.min(axis=1))
    dmax = float((p @ rho.table).min())
    Ds = np.linspace(dmin, dmax, 12)
    R = np.array([rate_distortion(p, rho, D) for D in Ds])
    assert np.all(np.diff(R) <= 1e-9)
    assert np.all(R[1:-1] <= 0.5 * (R[:-2] + R[2:]) + 1e-8)
    for D, r in zip(Ds[1:-1], R[1:-1]):
        if r > 1e-6:
            assert abs(distortion_rate(p, rho, r) - D) <= 1e-6


@SLOW
@given(seeds)
def test_ordering_of_rate_functions(seed):
    rng = np.random.default_rng(seed)
    p = rand_pmf(rng, 2, 0.05)
    side = rand_channel(rng, 2, 2, 0.02)
    prob = RdProblem(FinitePmf(p), DistortionMeasure.hamming(2), side)
    joint = JointPmf(p[:, None] * side.P)
    Ds = [0.02, 0.06, 0.12]
    prev = math.inf
    for D in Ds:
        cond = conditional_rate_distortion(joint, prob.rho, D)
        wz = wyner_ziv_rd(prob, D, restarts=8, seed=seed % 1000).rate
        cr = common_reconstruction_rd(prob, D)
        rd = rate_distortion(p, prob.rho, D)
        assert cond <= wz + 1e-6
        assert wz <= min(cr, rd) + 1e-6
        assert wz <= prev + 1e-6
        prev = wz


# ---------------------------------------------------------------------------
# LZ and maximum entropy


@FAST
@given(seeds, st.integers(1, 300), st.integers(2, 3), st.integers(1, 3))
def test_joint_parse_invariants(seed, n, ku, kw):
    rng = np.random.default_rng(seed)
    u, w = rng.integers(0, ku, n), rng.integers(0, kw, n)
    jp = joint_parse(u, w)
    # reconstruction
    assert np.concatenate([ph[0] for ph in jp.phrases]).tolist() == u.tolist()
    assert np.concatenate([ph[1] for ph in jp.phrases]).tolist() == w.tolist()
    # distinctness, except possibly the flagged final phrase
    body = jp.phrases[:-1] if jp.final_incomplete else jp.phrases
    assert len(set(body)) == len(body)
    # each complete pair phrase extends an earlier phrase by one symbol
    seen = set()
    for up, wp in body:
        if len(up) > 1:
            assert (up[:-1], wp[:-1]) in seen
        seen.add((up, wp))
    assert sum(jp.counts) == len(set(jp.phrases))
    assert len(jp.w_phrases) == len(jp.counts)


@FAST
@given(seeds, st.integers(1, 400), st.integers(2, 4))
def test_conditional_complexity_of_copy_is_zero(seed, n, k):
    u = np.random.default_rng(seed).integers(0, k, n)
    assert conditional_lz_complexity(u, u) == 0.0


@FAST
@given(st.lists(st.floats(0.1, 5.0), min_size=1, max_size=3))
def test_phi_psi_inverse(tail):
    dd = DifferenceDistortion([0.0] + tail)
    Ds = np.linspace(0.0, dd.varrho.mean(), 15)
    vals = np.array([phi(D, dd) for D in Ds])
    assert np.all(np.diff(vals) >= -1e-10)
    assert np.all(vals[1:-1] >= 0.5 * (vals[:-2] + vals[2:]) - 1e-9)
    for D in Ds[1:-1]:
        assert abs(psi(phi(D, dd), dd) - D) <= 1e-6


# ---------------------------------------------------------------------------
# bounds


@SLOW
@given(seeds)
def test_bound_monotone_in_capacity_and_side_information(seed):
    rng = np.random.default_rng(seed)
    p = FinitePmf(rand_pmf(rng, 2, 0.05))
    rho = DistortionMeasure.hamming(2)
    side = rand_channel(rng, 2, 2, 0.02)
    vals = []
    for C in (0.05, 0.2, 0.4):
        with_si = expected_distortion_bound(p, side, C, rho, SystemParams(), restarts=8).value
        without = expected_distortion_bound(p, None, C, rho, SystemParams()).value
        assert with_si <= without + 1e-6
        vals.append(without)
    assert vals[0] >= vals[1] >= vals[2]


# ---------------------------------------------------------------------------
# finite-state machines


@FAST
@given(seeds, st.integers(1, 4), st.integers(1, 4), st.integers(0, 2))
def test_simulation_deterministic(seed, ell, states, d):
    rng = np.random.default_rng(seed)
    enc = random_encoder(rng, ell, states, 2, 2)
    dec = random_decoder(rng, ell, states, d, 2, 2, 2)
    u = rng.integers(0, 2, 40)
    a = simulate_trials(enc, dec, u, Dmc.bsc(0.1), Dmc.bsc(0.2), 3, seed=seed % 997)
    b = simulate_trials(enc, dec, u, Dmc.bsc(0.1), Dmc.bsc(0.2), 3, seed=seed % 997)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@FAST
@given(seeds, st.integers(1, 4), st.integers(1, 3))
def test_phase_covariance(seed, ell, periods):
    rng = np.random.default_rng(seed)
    enc = random_encoder(rng, ell, 3, 2, 2)
    dec = random_decoder(rng, ell, 3, 0, 1, 2, 2)
    # a prefix of whole periods that returns the state to z0: use an encoder whose state never moves
    enc = type(enc)(enc.out, np.zeros_like(enc.nxt), enc.nx)
    dec = type(dec)(dec.out, np.zeros_like(dec.nxt), dec.nv, dec.d)
    u = rng.integers(0, 2, 24)
    pre = rng.integers(0, 2, ell * periods)
    x = run_encoder(enc, u).symbols
    xs = run_encoder(enc, np.concatenate([pre, u])).symbols
    assert np.array_equal(xs[pre.size:], x)
    w = np.zeros(24, dtype=int)
    v = run_decoder(dec, w, x).symbols
    vs = run_decoder(dec, np.zeros(24 + pre.size, dtype=int), xs).symbols
    assert np.array_equal(vs[pre.size:], v)
