"""Repeat-until-success synthesis of single-qubit gates.

Each ancilla interaction applies one of two branch unitaries at random.
The accumulated product performs a random walk on U(2); the walk stops the
first time it lands within ``epsilon`` (in :func:`gate_distance`) of the
target.

RNG contract: ``numpy.random.default_rng(seed)`` (PCG64), outcome ``0``
iff ``uniform < p0``. Trial ``i`` of a batch uses seed ``seed ^ i``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSpec, ordered_generators, stinespring_kraus
from .qcore import I2, PAULIS, gate_distance, is_unitary, project_unitary

__all__ = [
    "SynthTarget", "WalkTrajectory", "HittingStats", "FiniteWalkReport",
    "default_generators", "step", "run_until", "hitting_stats", "sample_outcomes",
    "finite_group_walk", "expected_time_upper_bound",
    "DEFAULT_EPSILON", "DEFAULT_CAP", "REUNITARIZE_EVERY",
]

DEFAULT_EPSILON = 0.01
DEFAULT_CAP = 10**7
REUNITARIZE_EVERY = 10_000
_BLOCK = 4096


def default_generators(alpha: float = math.pi / 8, flavor: str = "controlled"):
    """Branch unitaries and probabilities of the one-qubit channel, most probable first.

    At the default ``alpha`` this is ``(H Z^(1/4), X H Z^(1/4))`` with
    probabilities ``(cos^2(pi/8), sin^2(pi/8))``.
    """
    make = ChannelSpec.ising if flavor == "ising" else ChannelSpec.controlled
    gens, probs, _ = ordered_generators(stinespring_kraus(make(alpha)))
    return gens, probs


@dataclass(frozen=True, eq=False)
class SynthTarget:
    target: np.ndarray
    epsilon: float = DEFAULT_EPSILON
    cap: int = DEFAULT_CAP
    pauli_tolerant: bool = False

    def __post_init__(self):
        t = np.asarray(self.target, dtype=complex)
        if t.shape != (2, 2) or not is_unitary(t, 1e-10):
            raise ValueError("target must be a 2x2 unitary")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if int(self.cap) != self.cap or self.cap < 1:
            raise ValueError(f"cap must be a positive integer, got {self.cap}")
        object.__setattr__(self, "target", t)


@dataclass(eq=False)
class WalkTrajectory:
    seed: int
    outcomes: str
    accumulated: np.ndarray
    stop_step: int | None
    final_distance: float
    pauli: str | None = None
    history: list | None = None

    @property
    def capped(self) -> bool:
        return self.stop_step is None

    def to_dict(self) -> dict:
        from .serialization import operator_to_json

        out = {
            "seed": self.seed,
            "outcomes": self.outcomes,
            "stop_step": "cap-reached" if self.capped else self.stop_step,
            "final_distance": self.final_distance,
            "accumulated": operator_to_json(self.accumulated),
        }
        if self.pauli is not None:
            out["pauli"] = self.pauli
        if self.history is not None:
            out["history"] = [operator_to_json(u) for u in self.history]
        return out


class _Outcomes:
    """Block-buffered outcome sampler honoring ``outcome = 0 iff uniform < p0``."""

    def __init__(self, seed: int, p0: float):
        self._rng = np.random.default_rng(seed)
        self._p0 = p0
        self._buf = np.empty(0, dtype=np.int8)
        self._pos = 0

    def __next__(self) -> int:
        if self._pos == len(self._buf):
            self._buf = (self._rng.random(_BLOCK) >= self._p0).astype(np.int8)
            self._pos = 0
        o = self._buf[self._pos]
        self._pos += 1
        return int(o)


def sample_outcomes(probabilities, n: int, seed: int) -> np.ndarray:
    """``n`` outcomes drawn exactly as a walk with this seed would draw them."""
    stream = _Outcomes(seed, probabilities[0])
    return np.fromiter((next(stream) for _ in range(n)), dtype=np.int8, count=n)


def step(accumulated: np.ndarray, outcome: int, generators) -> np.ndarray:
    return generators[outcome] @ accumulated


def _resolve(generators, probabilities):
    if generators is None:
        generators, probabilities = default_generators()
    if probabilities is None or len(probabilities) != len(generators):
        raise ValueError("need one probability per generator")
    if abs(sum(probabilities) - 1.0) > 1e-10:
        raise ValueError("probabilities must sum to 1")
    if len(generators) == 1:
        probabilities = (1.0,)
    return tuple(np.asarray(g, dtype=complex) for g in generators), tuple(probabilities)


def run_until(target: SynthTarget, rng_seed: int, generators=None, probabilities=None,
              start: np.ndarray | None = None, keep_history: bool = False) -> WalkTrajectory:
    """Walk from ``start`` (identity) until within ``target.epsilon`` of the target.

    Reaching ``target.cap`` steps returns a trajectory with ``stop_step=None``.
    """
    gens, probs = _resolve(generators, probabilities)
    if target.pauli_tolerant:
        names = tuple(PAULIS)
        goals = [PAULIS[n] @ target.target for n in names]
    else:
        names = (None,)
        goals = [target.target]

    def distance(u):
        ds = [gate_distance(u, g) for g in goals]
        i = int(np.argmin(ds))
        return ds[i], names[i]

    acc = I2.copy() if start is None else np.array(start, dtype=complex)
    history = [acc.copy()] if keep_history else None
    d, pauli = distance(acc)
    if d <= target.epsilon:
        return WalkTrajectory(rng_seed, "", acc, 0, d, pauli, history)

    stream = _Outcomes(rng_seed, probs[0])
    outcomes = []
    eps = target.epsilon
    for k in range(1, int(target.cap) + 1):
        o = next(stream)
        acc = gens[o] @ acc
        outcomes.append("01"[o])
        if k % REUNITARIZE_EVERY == 0:
            acc = project_unitary(acc)
        if history is not None:
            history.append(acc.copy())
        d, pauli = distance(acc)
        if d <= eps:
            return WalkTrajectory(rng_seed, "".join(outcomes), acc, k, d, pauli, history)
    return WalkTrajectory(rng_seed, "".join(outcomes), acc, None, d, pauli, history)


@dataclass(eq=False)
class HittingStats:
    trials: int
    mean: float
    median: float
    p95: float
    failure_count: int
    stop_steps: np.ndarray = field(repr=False)
    final_distances: np.ndarray = field(repr=False)

    @property
    def stderr(self) -> float:
        ok = self.stop_steps[self.stop_steps >= 0]
        return float(np.std(ok, ddof=1) / math.sqrt(len(ok))) if len(ok) > 1 else math.nan

    @classmethod
    def from_steps(cls, steps, distances=None) -> "HittingStats":
        steps = np.asarray(steps, dtype=np.int64)
        if distances is None:
            distances = np.zeros(len(steps))
        ok = steps[steps >= 0]
        if len(ok):
            mean, median, p95 = float(ok.mean()), float(np.median(ok)), float(np.percentile(ok, 95))
        else:
            mean = median = p95 = math.nan
        return cls(len(steps), mean, median, p95, int(np.sum(steps < 0)),
                   steps, np.asarray(distances, dtype=float))


def _trial(args):
    target, seed, gens, probs = args
    t = run_until(target, seed, gens, probs)
    return (-1 if t.capped else t.stop_step), t.final_distance


def hitting_stats(target: SynthTarget, trials: int, seed: int, generators=None,
                  probabilities=None, workers: int = 1) -> HittingStats:
    """Independent walks, trial ``i`` seeded with ``seed ^ i``; capped trials count as failures."""
    gens, probs = _resolve(generators, probabilities)
    jobs = [(target, seed ^ i, gens, probs) for i in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        results = [_trial(j) for j in jobs]
    steps, dists = zip(*results) if results else ((), ())
    return HittingStats.from_steps(steps, dists)


def expected_time_upper_bound(decomposition, per_gate_expected) -> float:
    """Expected steps to realize a gate sequence one factor at a time.

    This bounds the sequential strategy only; stopping directly on the
    composite target can be faster.
    """
    total = 0.0
    for gate, count in decomposition:
        if gate not in per_gate_expected:
            raise ValueError(f"missing per-gate expected time for {gate!r}")
        total += count * per_gate_expected[gate]
    return total


def _projective_key(u: np.ndarray, digits: int = 9):
    flat = u.ravel()
    lead = flat[np.argmax(np.abs(flat) > 1e-6)]
    v = flat * (abs(lead) / lead)
    v = np.round(v, digits) + 0.0  # drops negative zeros
    return tuple(np.concatenate([v.real, v.imag]))


@dataclass(eq=False)
class FiniteWalkReport:
    elements: list
    table: np.ndarray  # table[g, e] = index of generators[g] @ elements[e]
    stats: list  # HittingStats per element

    @property
    def order(self) -> int:
        return len(self.elements)

    def index_of(self, u: np.ndarray) -> int:
        for i, e in enumerate(self.elements):
            if gate_distance(e, u) < 1e-9:
                return i
        raise KeyError("operator is not in the group")


def _closure(gens, max_order):
    elements = [I2.copy()]
    keys = {_projective_key(I2): 0}
    rows = [[] for _ in gens]
    i = 0
    while i < len(elements):
        for g, gen in enumerate(gens):
            u = gen @ elements[i]
            key = _projective_key(u)
            if key not in keys:
                if len(elements) >= max_order:
                    raise ValueError("not a finite group: closure exceeds "
                                     f"{max_order} elements (wrong generators?)")
                keys[key] = len(elements)
                elements.append(u)
            rows[g].append(keys[key])
        i += 1
    return elements, np.array(rows, dtype=np.int64)


def finite_group_walk(generators=None, probabilities=None, trials: int = 10_000,
                      seed: int = 0, cap: int = 10**5, max_order: int = 10**4) -> FiniteWalkReport:
    """Enumerate the projective group of the generators and time the walk's first visits.

    Defaults to the symmetric-interaction branches ``(H, H Z)``. Trial ``i``
    walks from the identity with seed ``seed ^ i`` until every element has
    been visited or ``cap`` steps pass; unvisited elements count as failures.
    """
    if generators is None:
        generators, probabilities = default_generators(flavor="ising")
    gens, probs = _resolve(generators, probabilities)
    elements, table = _closure(gens, max_order)
    n = len(elements)
    hits = np.full((trials, n), -1, dtype=np.int64)
    for t in range(trials):
        stream = _Outcomes(seed ^ t, probs[0])
        row = hits[t]
        row[0] = 0
        remaining = n - 1
        pos = 0
        for k in range(1, cap + 1):
            if remaining == 0:
                break
            pos = table[next(stream), pos]
            if row[pos] < 0:
                row[pos] = k
                remaining -= 1
    stats = [HittingStats.from_steps(hits[:, e]) for e in range(n)]
    return FiniteWalkReport(elements, table, stats)
