"""
An asymmetric gate from a symmetric interaction
===============================================

Target: (H x I) exp(-i pi/8 ZZ). With the generic coupling the Ising part
is approximated; at the special coupling where the +i increment is
exactly pi/8, the reachable angles form an eight-point lattice and the
target is hit exactly.
"""
import math

from rus_adqc.protocol import EXACT_ALPHA, EXACT_FLAG, asymmetric_gate_demo
from rus_adqc.synth2q import exact_reachable_set, increments

p = increments(EXACT_ALPHA, "ising")
lattice = exact_reachable_set(p, EXACT_FLAG)
print("coupling", EXACT_ALPHA, "phi/pi =", p.phi / math.pi)
for beta in lattice.values():
    print(f"  beta = {beta} pi   via outcomes {lattice.witnesses[beta]!r}")

for mode in ("irrational", "exact"):
    d = [asymmetric_gate_demo(seed, mode=mode).target_distance for seed in range(20)]
    print(f"{mode:>10}: worst gate distance {max(d):.2e}")
