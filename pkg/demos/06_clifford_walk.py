"""
The finite walk of the symmetric coupling
=========================================

With exp(i alpha ZZ) the one-qubit branches are H and HZ. They generate a
group of eight elements (up to phase), so the walk is a finite Markov
chain and every Clifford is reached exactly, usually within a few rounds.
"""
from rus_adqc.synth1q import finite_group_walk
from rus_adqc.qcore import H, I2, X, Z, Y

rep = finite_group_walk(trials=5000, seed=3)
print("group order:", rep.order)
for name, u in (("I", I2), ("H", H), ("X", X), ("Z", Z), ("Y", Y), ("HZ", H @ Z)):
    s = rep.stats[rep.index_of(u)]
    print(f"{name:>2}: mean first visit {s.mean:6.2f}  p95 {s.p95:5.1f}")
