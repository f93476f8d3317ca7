import math

import numpy as np
import pytest

from fsjscc.core import SymbolSequence
from fsjscc.errors import AlignmentError, EmptyInputError, ValidationError
from fsjscc.lzmaxent import (
    DifferenceDistortion,
    conditional_lz_complexity,
    joint_parse,
    lz78_parse,
    lz_complexity,
    phi,
    psi,
    psi_dual,
    two_sided_si_bound,
)

from oracles import h, hinv

HAM = DifferenceDistortion.hamming(2)


def seq(text):
    return SymbolSequence.from_string(text, 2)


class TestLz78:
    def test_hand_parse(self):
        res = lz78_parse(seq("010011"))
        assert res.phrases == ((0,), (1,), (0, 0), (1, 1))
        assert res.c == 4 and not res.final_incomplete

    def test_constant(self):
        assert lz78_parse(seq("000000")).phrases == ((0,), (0, 0), (0, 0, 0))

    def test_single_symbol(self):
        assert lz78_parse([1]).c == 1

    def test_final_incomplete_phrase_is_counted(self):
        res = lz78_parse([0, 1, 0])
        assert res.c == 3 and res.final_incomplete

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            lz78_parse([])


class TestJointParse:
    def test_hand_parse(self):
        jp = joint_parse(seq("010011"), seq("000000"))
        assert jp.phrases == (((0,), (0,)), ((1,), (0,)), ((0, 0), (0, 0)), ((1, 1), (0, 0)))
        assert jp.c_w == 2 and set(jp.w_phrases) == {(0,), (0, 0)}
        assert jp.counts == (2, 2)
        assert conditional_lz_complexity(jp, None) == pytest.approx(2 / 3, abs=1e-15)

    def test_identical_pair(self):
        u = np.random.default_rng(1).integers(0, 3, 500)
        jp = joint_parse(u, u)
        assert set(jp.counts) == {1}
        assert conditional_lz_complexity(u, u) == 0.0

    def test_misaligned(self):
        with pytest.raises(AlignmentError):
            joint_parse([0, 1], [0])

    def test_constant_w_has_few_w_phrases(self):
        n = 20000
        u = np.random.default_rng(2).integers(0, 2, n)
        jp = joint_parse(u, np.zeros(n, dtype=int))
        # w-phrases are the runs 0, 00, 000, ...: k(k+1)/2 <= n
        assert jp.c_w <= math.isqrt(2 * n) + 1

    def test_constant_w_approaches_unconditional(self):
        rng = np.random.default_rng(0)
        gaps = []
        for n in (20000, 200000):
            u = rng.integers(0, 2, n)
            K = conditional_lz_complexity(u, np.zeros(n, dtype=int))
            L = lz_complexity(u)
            assert abs(K - 1.0) < 0.15 and abs(L - 1.0) < 0.2
            gaps.append(abs(K - L))
        assert gaps[1] < gaps[0]

    def test_q_correction(self):
        jp = joint_parse(seq("010011"), seq("000000"))
        q = 0.5
        expected = sum((c + q * q) * math.log2(c / (4 * q * q)) for c in jp.counts) / 6
        assert conditional_lz_complexity(jp, None, q=q) == pytest.approx(expected, abs=1e-15)
        with pytest.raises(ValidationError):
            conditional_lz_complexity(jp, None, q=0.0)


class TestPhiPsi:
    def test_phi_endpoints(self):
        assert phi(0.0, HAM) == pytest.approx(0.0, abs=1e-12)
        assert phi(0.5, HAM) == pytest.approx(1.0, abs=1e-12)
        assert phi(0.9, HAM) == pytest.approx(1.0, abs=1e-12)

    def test_phi_binary(self):
        assert phi(0.11, HAM) == pytest.approx(float(h(0.11)), abs=1e-10)
        assert phi(0.11, HAM) == pytest.approx(0.49991, abs=1e-5)

    def test_phi_ternary_hamming(self):
        # max entropy with P(u != 0) <= D on Z_3: h(D) + D
        dd = DifferenceDistortion.hamming(3)
        assert phi(0.3, dd) == pytest.approx(float(h(0.3)) + 0.3, abs=1e-10)

    def test_psi(self):
        assert psi(0.0, HAM) == 0.0
        assert psi(1.0, HAM) == pytest.approx(0.5, abs=1e-12)
        assert psi(float(h(0.11)), HAM) == pytest.approx(0.11, abs=1e-10)
        assert psi(0.6, HAM) == pytest.approx(hinv(0.6), abs=1e-10)

    def test_psi_dual_agrees(self):
        dd = DifferenceDistortion([0.0, 1.0, 3.0])
        for R in (0.3, 0.9, 1.4):
            assert psi_dual(R, dd) == pytest.approx(psi(R, dd), abs=1e-6)

    def test_psi_range(self):
        with pytest.raises(ValidationError):
            psi(1.5, HAM)

    def test_requires_zero_at_zero(self):
        with pytest.raises(ValidationError):
            DifferenceDistortion([1.0, 0.0])


class TestTwoSidedBound:
    def _pair(self, n=4000, seed=0):
        rng = np.random.default_rng(seed)
        u = rng.integers(0, 2, n)
        return u, np.zeros(n, dtype=int)

    def test_vacuous_when_capacity_covers_complexity(self):
        u, w = self._pair()
        K = conditional_lz_complexity(u, w)
        rep = two_sided_si_bound(u, w, C=K + 0.01, dd=HAM)
        assert rep.value == 0.0 and rep.vacuous

    def test_h_inverse(self):
        u, w = self._pair()
        K = conditional_lz_complexity(u, w)
        rep = two_sided_si_bound(u, w, C=K - float(h(0.1)), dd=HAM)
        assert rep.value == pytest.approx(0.1, abs=1e-9)
        arg = 1 - float(h(0.1))
        rep = two_sided_si_bound(u, w, C=K - arg, dd=HAM)
        assert rep.value == pytest.approx(hinv(arg), abs=1e-9)

    def test_delay_clamps(self):
        u, w = self._pair()
        rep = two_sided_si_bound(u, w, C=0.8, dd=HAM, d=1, ell=1)
        assert rep.value == 0.0
        assert rep.terms["delay_penalty"] == 1.0

    def test_argument_clamped(self):
        u = np.random.default_rng(3).integers(0, 2, 60)
        rep = two_sided_si_bound(u, np.zeros(60, dtype=int), C=0.0, dd=HAM, q=0.05)
        if rep.terms["lz_complexity"] > 1:
            assert "argument-clamped-to-log-alpha" in rep.flags
            assert rep.terms["argument"] == 1.0

    def test_monotone_in_c_and_eta(self):
        u, w = self._pair()
        vals_c = [two_sided_si_bound(u, w, C, HAM).value for C in (0.0, 0.2, 0.4, 0.6)]
        vals_e = [two_sided_si_bound(u, w, 0.1, HAM, eta=e).value for e in (0.0, 0.2, 0.4)]
        assert all(a >= b for a, b in zip(vals_c, vals_c[1:]))
        assert all(a >= b for a, b in zip(vals_e, vals_e[1:]))
