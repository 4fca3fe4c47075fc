"""
Two qubits: a walk on the Ising angle
=====================================

Let one ancilla touch two register qubits in turn. After known local
gates are stripped off, each outcome applies exp(i delta ZZ) with one of
two increments, so the only thing that moves is one angle beta mod pi.
One increment is -pi/4, the other an irrational multiple of pi.
"""
import math

import numpy as np

from rus_adqc.channel import ChannelSpec, backaction, stinespring_kraus
from rus_adqc.synth2q import increments, irrationality_witness, run_until_beta

spec = ChannelSpec.controlled(math.pi / 8, qubits=2)
print("measurement basis symmetric:", backaction(spec).symmetric,
      " planes perpendicular:", backaction(spec).planes_perpendicular)
for b in stinespring_kraus(spec):
    c = b.classification
    print(f"{b.outcome}: p={b.probability:.3f} beta={c.beta:+.6f} z1={c.z1:+.4f} z2={c.z2:+.4f}")

p = increments(math.pi / 8)
print("tan(phi) =", math.tan(p.phi), " (-sqrt 2 =", -math.sqrt(2), ")")

w = irrationality_witness(10**5)
for k in (10, 100, 1000, 10**4, 10**5):
    print(f"closest return of k*delta_+ to 0 for k <= {k:6d}: {w.running_min[k - 1]:.2e}")

# walk to pi/4, the CZ class
steps = [run_until_beta(math.pi / 4, 0.01, p, 10**5, seed).stop_step for seed in range(500)]
print("to CZ class within 0.01: mean", np.mean(steps), "median", np.median(steps))
