"""
Conditional Lempel-Ziv complexity
=================================

Without any probabilistic model, the conditional LZ complexity of u given the
side information w measures how many bits per symbol u still carries. Its
excess over the channel capacity, mapped through the maximum-entropy inverse,
lower-bounds the distortion of any finite-state scheme with w at both ends.
"""

import numpy as np

from fsjscc import DifferenceDistortion, conditional_lz_complexity, joint_parse, lz78_parse, two_sided_si_bound

# The small worked example: u = 010011 with a constant w
jp = joint_parse([0, 1, 0, 0, 1, 1], [0] * 6)
print("phrases:", jp.phrases)
print("distinct w-phrases:", jp.c_w, " u-phrases per w-phrase:", jp.counts)
print("complexity:", conditional_lz_complexity([0, 1, 0, 0, 1, 1], [0] * 6))

rng = np.random.default_rng(0)
n = 50000
u = rng.integers(0, 2, n)
print(f"\nLZ78 phrases of a fair-coin sequence: {lz78_parse(u).c}")

# w is u seen through a BSC: the less noise, the lower the complexity
dd = DifferenceDistortion.hamming(2)
for flip in (0.0, 0.05, 0.2, 0.5):
    w = u ^ (rng.random(n) < flip)
    k = conditional_lz_complexity(u, w)
    rep = two_sided_si_bound(u, w, 0.2, dd)
    print(f"w = u through BSC({flip:.2f}): complexity {k:.3f}, distortion bound at C=0.2: {rep.value:.4f}")
