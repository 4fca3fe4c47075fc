"""
What one ancilla does to one register qubit
===========================================

The ancilla starts in |+i>, meets the register qubit once through the
fixed gate, and is measured in the {|+i>, |-i>} basis. Each outcome
leaves behind a unitary on the register, with a probability that does not
depend on the register state.
"""
import math

import numpy as np

from rus_adqc.channel import ChannelSpec, generalized_family, stinespring_kraus
from rus_adqc.qcore import H, X, cphase, gate_distance, zroot

# the bare controlled phase first: the two Kraus operators are (I +- Z^(1/2))/2
for b in stinespring_kraus(ChannelSpec(cphase(math.pi / 8))):
    print(b.outcome, np.round(b.kraus, 4).tolist())

# the full gate adds Hadamards; now each branch is X^j H Z^(1/4)
for b in stinespring_kraus(ChannelSpec.controlled()):
    j = int(gate_distance(b.unitary, X @ H @ zroot(4)) < 1e-9)
    print(f"outcome {b.outcome}: p = {b.probability:.6f}, unitary = X^{j} H Z^(1/4)")

print("cos^2(pi/8) =", math.cos(math.pi / 8) ** 2)

# weaker couplings: C(Z^(1/n)) gives X^j H Z^(1/2n), the odd branch fading as n grows
for n in (1, 2, 4, 16, 64):
    fam = generalized_family(n)
    print(f"n={n:3d}  p(odd branch) = {fam[1].probability:.2e}")
