"""Statevector simulation of the whole scheme on a small register.

Every ancilla round is simulated physically. A fresh ancilla is prepared,
entangled with one register qubit (or two, one after the other) by the
fixed gate, and projected onto the sampled basis outcome. In parallel each
directive accumulates the product of the ideal branch unitaries. The two
descriptions are checked against each other when the directive ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .channel import ChannelSpec, ordered_generators, stinespring_kraus
from .qcore import (
    H, I2, PAULIS, apply_gate, gate_distance, ising, make_gate, rz,
)
from .synth1q import REUNITARIZE_EVERY
from .synth2q import circular_distance, exact_increments, increments

__all__ = [
    "Synth1q", "Synth2q", "Program", "RunLog", "ChannelAgreementError",
    "execute", "fidelity", "ideal_state", "bell_demo", "asymmetric_gate_demo",
    "program_from_json", "circuit_from_json", "count_ancillas", "EXACT_ALPHA",
    "asymmetric_gate_target",
]

MAX_REGISTER = 8
# tan(-3pi/8) = -1/cos(2a): the +i increment becomes exactly pi/8
EXACT_ALPHA = 0.5 * math.acos(math.sqrt(2.0) - 1.0)
EXACT_FLAG = (-3, 8)


class ChannelAgreementError(RuntimeError):
    """Physical simulation and accumulated unitary disagree."""


@dataclass
class Synth1q:
    qubit: int
    target: np.ndarray
    epsilon: float = 0.01
    cap: int = 10**6
    pauli_tolerant: bool = False


@dataclass
class Synth2q:
    qubit_a: int
    qubit_b: int
    target_beta: float
    epsilon_beta: float = 0.01
    cap: int = 10**5
    local_epsilon: float | None = None
    local_cap: int = 10**6
    exact: tuple | None = None


@dataclass
class Program:
    register_size: int
    steps: list
    master_seed: int
    alpha: float = math.pi / 8
    flavor: str = "controlled"
    initial_state: np.ndarray | None = None

    def __post_init__(self):
        n = self.register_size
        if not 1 <= n <= MAX_REGISTER:
            raise ValueError(f"register size must be in [1, {MAX_REGISTER}]")
        for s in self.steps:
            qs = (s.qubit,) if isinstance(s, Synth1q) else (s.qubit_a, s.qubit_b)
            if any(not 0 <= q < n for q in qs):
                raise ValueError(f"qubit index out of range in {s}")
            if isinstance(s, Synth2q) and s.qubit_a == s.qubit_b:
                raise ValueError("two-qubit directive needs distinct qubits")


@dataclass(eq=False)
class RunLog:
    trajectories: list
    total_ancillas: int
    final_state: np.ndarray
    register_unitary: np.ndarray
    agreement: list = field(default_factory=list)
    fidelity: float | None = None
    aborted: bool = False
    max_norm_error: float = 0.0
    max_purity_error: float = 0.0
    frame: str = "global phase"
    target_distance: float | None = None

    def to_dict(self) -> dict:
        from .serialization import state_to_json

        out = {
            "aborted": self.aborted,
            "total_ancillas": self.total_ancillas,
            "trajectories": self.trajectories,
            "agreement_fidelities": list(self.agreement),
            "max_norm_error": self.max_norm_error,
            "max_ancilla_purity_error": self.max_purity_error,
            "frame": self.frame,
            "final_state": state_to_json(self.final_state),
        }
        if self.fidelity is not None:
            out["fidelity"] = self.fidelity
        if self.target_distance is not None:
            out["target_distance"] = self.target_distance
        return out


class _CapReached(Exception):
    pass


class _Machine:
    def __init__(self, program: Program):
        n = program.register_size
        self.n = n
        make = ChannelSpec.ising if program.flavor == "ising" else ChannelSpec.controlled
        self.spec1 = make(program.alpha, 1)
        self.spec2 = make(program.alpha, 2)
        self.basis = dict(zip(self.spec1.labels, self.spec1.basis))
        self.gens, self.probs, self.labels = ordered_generators(stinespring_kraus(self.spec1))
        self.branches2 = {b.outcome: b for b in stinespring_kraus(self.spec2)}
        self.correction = self.spec2.local_correction()
        self.flavor = program.flavor
        self.rng = np.random.default_rng(program.master_seed)

        if program.initial_state is None:
            psi = np.zeros(2**n, dtype=complex)
            psi[0] = 1.0
        else:
            psi = np.asarray(program.initial_state, dtype=complex)
        self.psi = psi.reshape([2] * n)
        self.unitary = np.eye(2**n, dtype=complex).reshape([2] * n + [2**n])
        self.ancillas = 0
        self.norm_err = 0.0
        self.purity_err = 0.0

    # physical rounds -----------------------------------------------------

    def _round(self, qubits, label: str, expected_p: float):
        full = np.multiply.outer(self.spec1.prep, self.psi)
        for q in qubits:
            full = apply_gate(full, self.spec1.interaction, (0, q + 1))
        m = self.basis[label]
        amp = np.tensordot(m.conj(), full, axes=(0, 0))
        p = float(np.vdot(amp, amp).real)
        if abs(p - expected_p) > 1e-10:
            raise ChannelAgreementError(
                f"Born probability {p} differs from branch probability {expected_p}")
        self.psi = amp / math.sqrt(p)
        post = np.multiply.outer(m, self.psi).reshape(2, -1)
        rho = post @ post.conj().T
        self.purity_err = max(self.purity_err, abs(1.0 - float(np.trace(rho @ rho).real)))
        self.norm_err = max(self.norm_err, abs(1.0 - float(np.linalg.norm(self.psi))))
        self.ancillas += 1

    def _track(self, op, qubits):
        self.unitary = apply_gate(self.unitary, op, qubits)

    def state(self) -> np.ndarray:
        return self.psi.reshape(-1).copy()

    # directives ----------------------------------------------------------

    def synth1q(self, q: int, target, eps: float, cap: int, tolerant: bool = False):
        goals = [(PAULIS[p] @ target, p) for p in PAULIS] if tolerant else [(target, None)]

        def dist(u):
            return min((gate_distance(u, g), p) for g, p in goals)

        acc = I2.copy()
        outcomes = []
        d, pauli = dist(acc)
        k = 0
        while d > eps:
            if k >= cap:
                raise _CapReached({"kind": "synth1q", "qubit": q, "outcomes": "".join(outcomes),
                                   "stop_step": "cap-reached", "final_distance": d})
            j = 0 if self.rng.random() < self.probs[0] else 1
            self._round((q,), self.labels[j], self.probs[j])
            self._track(self.gens[j], (q,))
            acc = self.gens[j] @ acc
            k += 1
            if k % REUNITARIZE_EVERY == 0:
                w, _, vh = np.linalg.svd(acc)
                acc = w @ vh
            outcomes.append("01"[j])
            d, pauli = dist(acc)
        traj = {"kind": "synth1q", "qubit": q, "outcomes": "".join(outcomes),
                "stop_step": k, "final_distance": d}
        if tolerant:
            traj["pauli"] = pauli
        return acc, traj

    def synth2q(self, s: Synth2q):
        qa, qb = s.qubit_a, s.qubit_b
        local_eps = s.local_epsilon
        if local_eps is None:
            local_eps = 1e-9 if self.flavor == "ising" else 1e-2
        params = increments(self.spec2.alpha, self.flavor)
        deltas = {"+i": params.delta_plus, "-i": params.delta_minus}
        if s.exact is not None:
            plus, minus = exact_increments(params, s.exact)
            L = math.lcm(plus.denominator, minus.denominator)
            lattice = {"+i": int(plus * L), "-i": int(minus * L)}
            goal = round(s.target_beta / math.pi * L) % L
            pos = 0

            def dist():
                return circular_distance(pos * math.pi / L, s.target_beta)

            def done():
                return pos == goal and dist() <= s.epsilon_beta
        else:
            beta = np.longdouble(0.0)

            def dist():
                return circular_distance(float(beta), s.target_beta)

            def done():
                return dist() <= s.epsilon_beta

        acc = np.eye(4, dtype=complex)
        outcomes, subwalks = [], []
        k = 0
        while not done():
            if k >= s.cap:
                raise _CapReached({"kind": "synth2q", "qubits": [qa, qb],
                                   "outcomes": "".join(outcomes), "stop_step": "cap-reached",
                                   "final_distance": dist(), "local_walks": subwalks})
            label = "+i" if self.rng.random() < params.p_plus else "-i"
            br = self.branches2[label]
            self._round((qa, qb), label, br.probability)
            self._track(br.unitary, (qa, qb))
            acc = br.unitary @ acc
            cls = br.classification
            for q, c, z, pos_in_pair in ((qa, self.correction[0], cls.z1, 0),
                                         (qb, self.correction[1], cls.z2, 1)):
                fix = rz(2 * z) @ c  # e^{-i z Z} c
                v, traj = self.synth1q(q, fix, local_eps, s.local_cap)
                subwalks.append(traj)
                acc = (np.kron(v, I2) if pos_in_pair == 0 else np.kron(I2, v)) @ acc
            if s.exact is not None:
                pos = (pos + lattice[label]) % L
            else:
                beta = (beta + np.longdouble(deltas[label])) % np.longdouble(np.pi)
            outcomes.append("+" if label == "+i" else "-")
            k += 1
        value = pos * math.pi / L if s.exact is not None else float(beta)
        traj = {"kind": "synth2q", "qubits": [qa, qb], "outcomes": "".join(outcomes),
                "stop_step": k, "final_distance": dist(), "beta": value,
                "gate_distance": gate_distance(acc, ising(value)), "local_walks": subwalks}
        return acc, traj


def _apply_to(op, qubits, before, n):
    return apply_gate(before.reshape([2] * n), op, qubits).reshape(-1)


def execute(program: Program, ideal=None, up_to_local_z: bool = False) -> RunLog:
    """Run every directive; stop early (``aborted=True``) when a walk hits its cap.

    ``ideal`` may be a state vector or a circuit (list of ``(op, qubits)``);
    the reported fidelity compares against it, optionally maximized over
    single-qubit z phases.
    """
    m = _Machine(program)
    trajectories, agreement = [], []
    aborted = False
    for s in program.steps:
        before = m.state()
        try:
            if isinstance(s, Synth1q):
                acc, traj = m.synth1q(s.qubit, np.asarray(s.target, dtype=complex),
                                      s.epsilon, s.cap, s.pauli_tolerant)
                qubits = (s.qubit,)
            else:
                acc, traj = m.synth2q(s)
                qubits = (s.qubit_a, s.qubit_b)
        except _CapReached as exc:
            trajectories.append(exc.args[0])
            aborted = True
            break
        trajectories.append(traj)
        expect = _apply_to(acc, qubits, before, m.n)
        f = float(abs(np.vdot(expect, m.state())) ** 2)
        if f < 1 - 1e-8:
            raise ChannelAgreementError(f"statevector and unitary paths disagree: fidelity {f}")
        agreement.append(f)

    final = m.state()
    log = RunLog(trajectories, m.ancillas, final,
                 m.unitary.reshape(2**m.n, 2**m.n), agreement, aborted=aborted,
                 max_norm_error=m.norm_err, max_purity_error=m.purity_err)
    if ideal is not None:
        init = program.initial_state
        target = ideal_state(ideal, m.n, init) if isinstance(ideal, list) else np.asarray(ideal)
        log.fidelity = fidelity(final, target, up_to_local_z)
        if up_to_local_z:
            log.frame = "global phase and single-qubit z phases"
    return log


def count_ancillas(trajectories) -> int:
    """Ancilla rounds recorded in a list of trajectories, nested local walks included."""
    return sum(len(t["outcomes"]) + count_ancillas(t.get("local_walks", ()))
               for t in trajectories)


def ideal_state(circuit, n: int, initial=None) -> np.ndarray:
    if initial is None:
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.asarray(initial, dtype=complex)
    psi = psi.reshape([2] * n)
    for op, qubits in circuit:
        psi = apply_gate(psi, np.asarray(op, dtype=complex), tuple(qubits))
    return psi.reshape(-1)


def fidelity(state: np.ndarray, ideal: np.ndarray, up_to_local_z: bool = False) -> float:
    """``|<ideal|state>|^2``; optionally maximized over ``diag(1, e^{i t_k})`` on each qubit."""
    base = float(abs(np.vdot(ideal, state)) ** 2)
    if not up_to_local_z:
        return base
    n = int(round(math.log2(len(state))))
    bits = ((np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(float)
    w = ideal.conj() * state

    def neg(t):
        return -abs(np.sum(w * np.exp(1j * bits @ t))) ** 2

    best = base
    rng = np.random.default_rng(0)
    starts = [np.zeros(n)] + [rng.uniform(0, 2 * math.pi, n) for _ in range(4)]
    for t0 in starts:
        res = minimize(neg, t0, method="BFGS")
        best = max(best, -float(res.fun))
    return min(best, 1.0)


def bell_demo(seed: int, epsilon_beta: float = 0.01, alpha: float = math.pi / 8) -> RunLog:
    """Bell pair from ``|00>`` using only ancilla rounds of the symmetric gate.

    ``H (x) H``, Ising angle ``pi/4``, ``H (x) H`` again. This leaves
    ``(|00> + i|11>)/sqrt(2)``, a Bell state up to a z phase.
    """
    steps = [Synth1q(0, H, 1e-9), Synth1q(1, H, 1e-9),
             Synth2q(0, 1, math.pi / 4, epsilon_beta),
             Synth1q(0, H, 1e-9), Synth1q(1, H, 1e-9)]
    prog = Program(2, steps, seed, alpha=alpha, flavor="ising")
    bell = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return execute(prog, ideal=bell, up_to_local_z=True)


ASYMMETRIC_TARGET_BETA = -math.pi / 8


def asymmetric_gate_target() -> np.ndarray:
    return np.kron(H, I2) @ ising(ASYMMETRIC_TARGET_BETA)


def asymmetric_gate_demo(seed: int, mode: str = "irrational", epsilon_beta: float = 0.01,
                         epsilon: float = 1e-9) -> RunLog:
    """Build ``(H (x) I) exp(-i pi/8 Z(x)Z)`` from the symmetric gate alone.

    ``mode="exact"`` picks the coupling at which the ``+i`` increment is
    exactly ``pi/8``, so the Ising part lands on the lattice point.
    """
    if mode == "exact":
        alpha, exact = EXACT_ALPHA, EXACT_FLAG
    elif mode == "irrational":
        alpha, exact = math.pi / 8, None
    else:
        raise ValueError("mode must be 'irrational' or 'exact'")
    steps = [Synth2q(0, 1, ASYMMETRIC_TARGET_BETA, epsilon_beta, exact=exact),
             Synth1q(0, H, epsilon)]
    log = execute(Program(2, steps, seed, alpha=alpha, flavor="ising"))
    log.target_distance = gate_distance(log.register_unitary, asymmetric_gate_target())
    return log


# JSON front ends --------------------------------------------------------

def _gate_from_json(obj):
    from .serialization import operator_from_json

    if isinstance(obj, dict) and "entries" in obj:
        return operator_from_json(obj)
    if isinstance(obj, dict):
        return make_gate(obj["name"], obj.get("param"))
    return make_gate(obj)


def program_from_json(obj: dict, master_seed: int) -> Program:
    """Build a :class:`Program` from its JSON form (see README for the schema)."""
    steps = []
    for d in obj["steps"]:
        kind = d.get("type")
        if kind == "synth1q":
            steps.append(Synth1q(int(d["qubit"]), _gate_from_json(d["target"]),
                                 float(d.get("epsilon", 0.01)), int(d.get("cap", 10**6)),
                                 bool(d.get("pauli_tolerant", False))))
        elif kind == "synth2q":
            qa, qb = d["qubits"]
            exact = d.get("exact")
            if exact is not None:
                fr = Fraction(exact)
                exact = (fr.numerator, fr.denominator)
            steps.append(Synth2q(int(qa), int(qb), float(d["target_beta"]),
                                 float(d.get("epsilon_beta", 0.01)), int(d.get("cap", 10**5)),
                                 d.get("local_epsilon"), int(d.get("local_cap", 10**6)), exact))
        else:
            raise ValueError(f"unknown directive type {kind!r}")
    init = obj.get("initial_state")
    if init is not None:
        from .serialization import state_from_json

        init = state_from_json(init)
    return Program(int(obj["register_size"]), steps, master_seed,
                   float(obj.get("alpha", math.pi / 8)), obj.get("flavor", "controlled"), init)


def circuit_from_json(obj: dict):
    """``{"gates": [{"name": .., "param": .., "qubits": [..]}, ...]}`` to ``(op, qubits)`` pairs."""
    return [(_gate_from_json(g), tuple(g["qubits"])) for g in obj["gates"]]
