"""
Rate-distortion and channel capacity
====================================

The two single-letter quantities behind every bound in the package: the
rate-distortion function of a source and the capacity of a channel. For a
fair coin under Hamming distortion the curve is 1 - h(D), and the binary
symmetric channel BSC(p) has capacity 1 - h(p).
"""

import numpy as np

from fsjscc import CostFunction, DistortionMeasure, Dmc, FinitePmf, capacity, distortion_rate, rate_distortion
from fsjscc.core import binary_entropy

ham = DistortionMeasure.hamming(2)
coin = FinitePmf([0.5, 0.5])

# R(D) against the closed form
for D in np.linspace(0.0, 0.5, 6):
    print(f"D={D:.1f}  R(D)={rate_distortion(coin, ham, D):.6f}  1-h(D)={1 - binary_entropy(D):.6f}")

# The inverse: at the capacity of BSC(0.1) an uncoded link reaches distortion 0.1
C = capacity(Dmc.bsc(0.1)).value
print(f"\nC(BSC(0.1)) = {C:.6f}, D(C) = {distortion_rate(coin, ham, C):.6f}")

# A skewed source needs fewer bits at every distortion
skew = FinitePmf([0.8, 0.2])
print(f"R(0.05) fair coin {rate_distortion(coin, ham, 0.05):.4f}, Bernoulli(0.2) {rate_distortion(skew, ham, 0.05):.4f}")

# Capacity under an input cost: sending a 1 costs one unit, the budget limits its frequency
for budget in (0.0, 0.1, 0.2, 0.3, 0.5):
    res = capacity(Dmc.bsc(0.1), CostFunction([0.0, 1.0], budget))
    print(f"budget {budget:.1f}: C = {res.value:.5f}, P(X=1) = {res.input_pmf[1]:.3f}")
