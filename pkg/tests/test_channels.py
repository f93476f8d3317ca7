import numpy as np
import pytest

from fsjscc.channels import (
    CostFunction,
    StateChannel,
    capacity,
    causal_state_capacity,
    r_infinity,
    sphere_packing,
    sphere_packing_exponent,
    sphere_packing_primal,
)
from fsjscc.core import Dmc
from fsjscc.errors import InfeasibleError

from oracles import dbin, esp_bsc, h


class TestCapacity:
    def test_noiseless(self):
        res = capacity(Dmc.noiseless(2))
        assert res.value == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(res.input_pmf, 0.5, atol=1e-6)

    @pytest.mark.parametrize("p", [0.05, 0.1, 0.2, 0.3])
    def test_bsc(self, p):
        assert capacity(Dmc.bsc(p)).value == pytest.approx(1 - h(p), abs=1e-9)

    def test_zero_budget(self):
        res = capacity(Dmc.bsc(0.1), CostFunction([0.0, 1.0], 0.0))
        assert res.value == pytest.approx(0.0, abs=1e-9)

    def test_cost_budget_matches_binary_form(self):
        # P(X=1) <= G on BSC(p): capacity h(G*p) - h(p) while G < 1/2.
        p, G = 0.1, 0.2
        res = capacity(Dmc.bsc(p), CostFunction([0.0, 1.0], G))
        assert res.value == pytest.approx(h(G * (1 - p) + (1 - G) * p) - h(p), abs=1e-7)

    def test_inactive_budget(self):
        res = capacity(Dmc.bsc(0.1), CostFunction([0.0, 1.0], 0.9))
        assert res.value == pytest.approx(1 - h(0.1), abs=1e-9)

    def test_infeasible_budget(self):
        with pytest.raises(InfeasibleError):
            capacity(Dmc.bsc(0.1), CostFunction([1.0, 2.0], 0.5))


class TestSpherePacking:
    def test_zero_at_capacity(self):
        C = 1 - h(0.1)
        assert sphere_packing_exponent(Dmc.bsc(0.1), C) == pytest.approx(0.0, abs=1e-9)
        assert sphere_packing_exponent(Dmc.bsc(0.1), C + 0.1) == 0.0

    def test_near_zero_rate(self):
        assert sphere_packing_exponent(Dmc.bsc(0.1), 1e-6) == pytest.approx(esp_bsc(0.1, 1e-6), abs=1e-6)
        assert sphere_packing_exponent(Dmc.bsc(0.1), 1e-12) == pytest.approx(dbin(0.5, 0.1), abs=1e-5)
        assert dbin(0.5, 0.1) == pytest.approx(0.73697, abs=1e-5)

    @pytest.mark.parametrize("R", [0.05, 0.25, 0.4])
    def test_binary_oracle(self, R):
        assert sphere_packing_exponent(Dmc.bsc(0.1), R) == pytest.approx(esp_bsc(0.1, R), abs=1e-6)

    def test_below_r_infinity_is_infinite(self):
        # Z-channel style zero gives R_inf > 0.
        ch = Dmc([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        Rinf = r_infinity(ch)
        assert Rinf > 0
        res = sphere_packing(ch, Rinf / 2)
        assert res.value == np.inf

    def test_primal_zero_when_rate_exceeds_mutual_information(self):
        assert sphere_packing_primal(Dmc.bsc(0.1), 0.6, [0.5, 0.5]) == 0.0
        assert sphere_packing_primal(Dmc.bsc(0.1), 1.0) == 0.0

    def test_primal_matches_dual_bsc(self):
        primal = sphere_packing_primal(Dmc.bsc(0.1), 0.25, [0.5, 0.5])
        assert primal == pytest.approx(esp_bsc(0.1, 0.25), abs=2e-3)


class TestCausalState:
    def test_xor_state(self):
        P = np.zeros((2, 2, 2))
        for x in range(2):
            for s in range(2):
                P[x, s, x ^ s] = 1.0
        value, _ = causal_state_capacity(StateChannel(P, [0.5, 0.5]))
        assert value == pytest.approx(1.0, abs=1e-9)
        # state-blind: completely noisy
        assert capacity(StateChannel(P, [0.5, 0.5]).averaged()).value == pytest.approx(0.0, abs=1e-9)

    def test_state_irrelevant(self):
        W = Dmc.bsc(0.2).P
        P = np.stack([W, W], axis=1)
        value, _ = causal_state_capacity(StateChannel(P, [0.3, 0.7]))
        assert value == pytest.approx(capacity(Dmc(W)).value, abs=1e-9)

    def test_single_state(self):
        W = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6]])
        value, _ = causal_state_capacity(StateChannel(W[:, None, :], [1.0]))
        assert value == pytest.approx(capacity(Dmc(W)).value, abs=1e-9)
