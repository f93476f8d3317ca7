"""
Side information at the decoder
===============================

When the decoder sees a noisy copy W of the source, fewer bits are needed.
Knowing W at the encoder too (conditional RDF) helps more, and forcing the
decoder's output to be reproducible by the encoder (common reconstruction)
helps less. For a fair coin seen through BSC(0.25) the four functions are
ordered conditional <= Wyner-Ziv <= common reconstruction <= ordinary.
"""

from fsjscc import (
    DistortionMeasure,
    Dmc,
    FinitePmf,
    RdProblem,
    common_reconstruction_rd,
    conditional_rate_distortion,
    rate_distortion,
    wyner_ziv_rd,
    wz_oracle,
)

ham = DistortionMeasure.hamming(2)
prob = RdProblem(FinitePmf([0.5, 0.5]), ham, Dmc.bsc(0.25))

print("   D   conditional  Wyner-Ziv  common-rec  ordinary")
for D in (0.02, 0.05, 0.1, 0.15, 0.2):
    cond = conditional_rate_distortion(prob.joint, ham, D)
    wz = wyner_ziv_rd(prob, D)
    cr = common_reconstruction_rd(prob, D)
    r = rate_distortion(prob.source, ham, D)
    print(f"{D:5.2f}  {cond:10.5f}  {wz.rate:9.5f}  {cr:10.5f}  {r:8.5f}")

# The solver returns an explicit test channel and decoder that achieve its rate
sol = wyner_ziv_rd(prob, 0.1)
print(f"\nat D=0.1: rate {sol.rate:.5f}, achieved distortion {sol.distortion:.5f}")
print("test channel P(a|u):\n", sol.test_channel.round(4))

# An independent brute-force check on a simplex grid
print(f"grid oracle at D=0.1: {wz_oracle(prob, 0.1, resolution=0.05).value:.5f}")
