"""
Repeat until success on one qubit
=================================

Every round multiplies the register by H Z^(1/4) or X H Z^(1/4). Two
different outcome pairs are rotations by the same irrational angle about
non-parallel axes, so the products fill SU(2) densely and a random walk
gets arbitrarily close to any target. We just keep going until it does.
"""
import math

import numpy as np

from rus_adqc.qcore import axis_angle, dagger, random_unitary, xroot, zroot
from rus_adqc.synth1q import SynthTarget, hitting_stats, run_until

a = axis_angle(dagger(xroot(4)) @ zroot(4))
b = axis_angle(xroot(4) @ zroot(4))
print("half-angle cosines:", a.half_angle_cos, b.half_angle_cos, 0.5 * (1 + 1 / math.sqrt(2)))
print("axes:", np.round(a.axis, 4), np.round(b.axis, 4))

t = run_until(SynthTarget(zroot(4), epsilon=0.01), rng_seed=2024)
print(f"T to 0.01: {t.stop_step} rounds, distance {t.final_distance:.4f}")
print("first outcomes:", t.outcomes[:40], "...")

# hitting time grows as epsilon shrinks (at 0.1 the identity already counts: 1 - cos(pi/8) < 0.1)
for eps in (0.1, 0.05, 0.02, 0.01):
    s = hitting_stats(SynthTarget(zroot(4), eps), trials=300, seed=1)
    print(f"eps={eps:<5} mean {s.mean:8.1f}  median {s.median:7.1f}  p95 {s.p95:8.1f}")

# random targets
rng = np.random.default_rng(0)
steps = [run_until(SynthTarget(random_unitary(2, rng), 0.05), i).stop_step for i in range(50)]
print("Haar targets at 0.05, mean rounds:", np.mean(steps))
