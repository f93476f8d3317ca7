"""
Probability of excess distortion
================================

Beyond the average, one can ask how often the distortion exceeds a target.
For uncoded transmission over BSC(0.1) the number of errors is binomial, so
the excess probability is an exact binomial tail. The sphere-packing based
lower bound is compared with that tail and with a Monte-Carlo estimate.
"""

import math

import numpy as np
from scipy import stats

from fsjscc import (
    DistortionMeasure,
    Dmc,
    SimConfig,
    SymbolSequence,
    SystemParams,
    block_empirical,
    excess_distortion_bound,
    monte_carlo_excess,
    sphere_packing_exponent,
)
from fsjscc.simfsm import baseline_uncoded

ham = DistortionMeasure.hamming(2)
ch = Dmc.bsc(0.1)

# The sphere-packing exponent of the channel
for R in (0.05, 0.1, 0.2, 0.3, 0.5):
    print(f"E_sp({R:.2f}) = {sphere_packing_exponent(ch, R):.5f}")

enc, dec = baseline_uncoded()
print("\n   n   D     exact tail   Monte-Carlo (99% CI)          bound")
for n, D in ((100, 0.15), (200, 0.15), (400, 0.15), (200, 0.2)):
    u = np.zeros(n, dtype=int)
    u[: n // 2] = 1
    u = SymbolSequence.from_list(u, 2)
    exact = stats.binom.sf(math.ceil(n * D) - 1, n, 0.1)
    mc = monte_carlo_excess(enc, dec, u, ch, None, ham, D, SimConfig(20000, seed=1))
    b = excess_distortion_bound(block_empirical(u, 1), ch, D, 0.0, np.linspace(0.001, 1 - D, 400), ham,
                                SystemParams(n=n))
    print(f"{n:4d} {D:4.2f}  {exact:.3e}   {mc.estimate:.3e} [{mc.low:.3e}, {mc.high:.3e}]  {b.value:.3e}")
