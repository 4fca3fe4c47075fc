"""Random walk on the Ising angle of the two-qubit branch gates.

After the known local factors are removed, each two-qubit ancilla round
applies ``exp(i * delta * Z(x)Z)`` with ``delta`` one of two fixed
increments. Products commute, so the gate is tracked by a single angle
``beta`` modulo ``pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import ChannelSpec, stinespring_kraus

__all__ = [
    "BetaWalkParams", "BetaTrajectory", "ReachableSet", "WitnessTable",
    "increments", "run_until_beta", "run_until_beta_exact", "exact_reachable_set",
    "irrationality_witness", "circular_distance", "exact_increments", "replay_witness",
]

_PI = np.longdouble(np.pi)


def circular_distance(a: float, b: float) -> float:
    """Arc length between two angles on the circle of circumference ``pi``."""
    r = abs(a - b) % math.pi
    return min(r, math.pi - r)


def _mod_pi_half(x: float) -> float:
    r = math.remainder(x, math.pi)
    return math.pi / 2 if r <= -math.pi / 2 else r


@dataclass(frozen=True)
class BetaWalkParams:
    """Step sizes and probabilities of the angle walk.

    ``delta_plus`` and ``delta_minus`` are the angles of the ``+i`` and
    ``-i`` branches as read off the explicit channel, reduced to
    ``(-pi/2, pi/2]``. ``phi`` satisfies ``tan(phi) = -1/cos(2 alpha)``
    (principal branch) and ``delta_plus = -(phi + pi/4) mod pi``.
    """

    alpha: float
    phi: float
    delta_plus: float
    delta_minus: float
    p_plus: float
    p_minus: float


def increments(alpha: float, flavor: str = "controlled") -> BetaWalkParams:
    if not (0.0 < alpha < math.pi / 2):
        raise ValueError("alpha must lie in (0, pi/2)")
    c = math.cos(2 * alpha)
    if abs(c) < 1e-12:
        raise ValueError("singular strength: cos(2 alpha) = 0 leaves phi undefined")
    phi = math.atan(-1.0 / c)
    make = ChannelSpec.ising if flavor == "ising" else ChannelSpec.controlled
    branches = {b.outcome: b for b in stinespring_kraus(make(alpha, 2))}
    plus, minus = branches["+i"], branches["-i"]
    d_plus = _mod_pi_half(-(phi + math.pi / 4))
    d_minus = _mod_pi_half(-math.pi / 4)
    for br, expect in ((plus, d_plus), (minus, d_minus)):
        if br.classification is None or circular_distance(br.classification.beta, expect) > 1e-9:
            raise RuntimeError(f"channel branch {br.outcome} disagrees with the closed-form increment")
    return BetaWalkParams(alpha, phi, d_plus, d_minus, plus.probability, minus.probability)


@dataclass(eq=False)
class BetaTrajectory:
    seed: int
    outcomes: str
    beta_values: np.ndarray
    stop_step: int | None
    final_distance: float
    target: float

    @property
    def capped(self) -> bool:
        return self.stop_step is None

    @property
    def beta(self) -> float:
        return float(self.beta_values[-1])

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "outcomes": self.outcomes,
            "beta_values": [float(b) for b in self.beta_values],
            "stop_step": "cap-reached" if self.capped else self.stop_step,
            "final_distance": self.final_distance,
            "target_beta": self.target,
        }


def run_until_beta(target_beta: float, epsilon_beta: float, params: BetaWalkParams,
                   cap: int, seed: int, start: float = 0.0) -> BetaTrajectory:
    """Walk ``beta`` (mod pi) until within ``epsilon_beta`` of ``target_beta``.

    Outcome ``+i`` iff ``uniform < p_plus``; uniforms come from
    ``numpy.random.default_rng(seed)``.
    """
    if not epsilon_beta > 0:
        raise ValueError("epsilon_beta must be positive")
    rng = np.random.default_rng(seed)
    steps = (np.longdouble(params.delta_plus), np.longdouble(params.delta_minus))
    beta = np.longdouble(start) % _PI
    values = [float(beta)]
    outcomes = []
    d = circular_distance(float(beta), target_beta)
    if d <= epsilon_beta:
        return BetaTrajectory(seed, "", np.array(values), 0, d, target_beta)
    k = 0
    while k < cap:
        block = rng.random(min(4096, cap - k))
        for u in block:
            k += 1
            o = 0 if u < params.p_plus else 1
            beta = (beta + steps[o]) % _PI
            outcomes.append("+-"[o])
            values.append(float(beta))
            d = circular_distance(float(beta), target_beta)
            if d <= epsilon_beta:
                return BetaTrajectory(seed, "".join(outcomes), np.array(values), k, d, target_beta)
    return BetaTrajectory(seed, "".join(outcomes), np.array(values), None, d, target_beta)


def exact_increments(params: BetaWalkParams, rational_flag) -> tuple[Fraction, Fraction]:
    """Increments in units of ``pi`` given the caller's assertion ``phi = (p/q) pi``.

    The assertion is checked against ``params.phi`` to 1e-9 (a typo guard,
    not a rationality test).
    """
    p, q = rational_flag
    phi = Fraction(p, q)
    if circular_distance(float(phi) * math.pi, params.phi) > 1e-9:
        raise ValueError(f"rational flag {p}/{q} does not match phi = {params.phi}")
    plus = (-(phi + Fraction(1, 4))) % 1
    minus = Fraction(-1, 4) % 1
    return plus, minus


@dataclass(frozen=True)
class ReachableSet:
    """Angles (as fractions of ``pi`` in ``[0, 1)``) with a shortest outcome string each."""

    witnesses: dict

    def __contains__(self, beta_over_pi) -> bool:
        return Fraction(beta_over_pi) % 1 in self.witnesses

    def __len__(self) -> int:
        return len(self.witnesses)

    def values(self) -> list:
        return sorted(self.witnesses)


def replay_witness(witness: str, plus: Fraction, minus: Fraction) -> Fraction:
    total = Fraction(0)
    for o in witness:
        total += plus if o == "+" else minus
    return total % 1


def exact_reachable_set(params: BetaWalkParams, rational_flag,
                        max_size: int = 10**6) -> ReachableSet:
    """Closure of ``{0}`` under the two increments, in exact rational arithmetic.

    For finite groups closure under addition alone equals closure under
    plus and minus, and every element gets a realizable outcome string.
    """
    plus, minus = exact_increments(params, rational_flag)
    witnesses = {Fraction(0): ""}
    frontier = [Fraction(0)]
    while frontier:
        nxt = []
        for b in frontier:
            for inc, sym in ((plus, "+"), (minus, "-")):
                c = (b + inc) % 1
                if c not in witnesses:
                    if len(witnesses) >= max_size:
                        raise ValueError("effectively dense: closure exceeds "
                                         f"{max_size} elements; check the rational flag")
                    witnesses[c] = witnesses[b] + sym
                    nxt.append(c)
        frontier = nxt
    return ReachableSet(witnesses)


def run_until_beta_exact(target_beta: float, epsilon_beta: float, params: BetaWalkParams,
                         rational_flag, cap: int, seed: int) -> BetaTrajectory:
    """Lattice walk in integer units of ``pi / L``.

    The target is snapped to the nearest lattice point; the walk stops when
    it sits exactly there, provided that point is within ``epsilon_beta``
    of the requested target. Otherwise it runs to ``cap``.
    """
    plus, minus = exact_increments(params, rational_flag)
    L = math.lcm(plus.denominator, minus.denominator)
    steps = (int(plus * L), int(minus * L))
    goal = round(target_beta / math.pi * L) % L
    reachable = circular_distance(goal * math.pi / L, target_beta) <= epsilon_beta
    rng = np.random.default_rng(seed)
    pos = 0
    values = [0.0]
    outcomes = []

    def dist(x):
        return circular_distance(x * math.pi / L, target_beta)

    if reachable and pos == goal:
        return BetaTrajectory(seed, "", np.array(values), 0, dist(pos), target_beta)
    for k in range(1, cap + 1):
        o = 0 if rng.random() < params.p_plus else 1
        pos = (pos + steps[o]) % L
        outcomes.append("+-"[o])
        values.append(pos * math.pi / L)
        if reachable and pos == goal:
            return BetaTrajectory(seed, "".join(outcomes), np.array(values), k, dist(pos), target_beta)
    return BetaTrajectory(seed, "".join(outcomes), np.array(values), None, dist(pos), target_beta)


@dataclass(frozen=True, eq=False)
class WitnessTable:
    k: np.ndarray
    distance: np.ndarray
    running_min: np.ndarray

    @property
    def min_distance(self) -> float:
        return float(self.running_min[-1])


def irrationality_witness(k_max: int, delta: float | None = None) -> WitnessTable:
    """Distance of ``k * delta`` (mod pi) to 0 for ``k = 1..k_max``.

    Defaults to ``delta_plus`` at ``alpha = pi/8``. A consistency check on
    the irrational increment, not a proof.
    """
    if not 1 <= k_max <= 10**6:
        raise ValueError("k_max must lie in [1, 1e6]")
    if delta is None:
        delta = increments(math.pi / 8).delta_plus
    k = np.arange(1, k_max + 1)
    r = (k.astype(np.longdouble) * np.longdouble(delta)) % _PI
    dist = np.minimum(r, _PI - r).astype(float)
    return WitnessTable(k, dist, np.minimum.accumulate(dist))
