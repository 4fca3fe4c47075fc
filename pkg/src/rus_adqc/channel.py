"""Measurement-induced Kraus operators of the fixed ancilla-register gate.

An ancilla is prepared in ``prep``, interacts with one register qubit (or
with two, one after the other) through the same 4x4 gate, and is measured
in a fixed two-element basis. Each outcome ``m`` induces
``K_m = (<m| (x) I) U (|prep> (x) I)`` on the register.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    H, I2, KET0, KET1, MINUS_I, PLUS_I,
    IsingDecomposition, apply_gate, axis_angle, gate_distance, interaction,
    ising_decompose, is_unitary, rz, zroot,
)

__all__ = [
    "ChannelSpec", "KrausBranch", "BackActionReport", "NonUnitaryBranchError",
    "PM_I_BASIS", "COMPUTATIONAL_BASIS",
    "stinespring_kraus", "generalized_family", "backaction",
    "classify_two_qubit_branch", "ordered_generators", "embed",
]

PM_I_BASIS = ((PLUS_I, MINUS_I), ("+i", "-i"))
COMPUTATIONAL_BASIS = ((KET0, KET1), ("0", "1"))

_PROPORTIONAL_TOL = 1e-8
_ZERO_BRANCH = 1e-14


class NonUnitaryBranchError(ValueError):
    """A measurement outcome does not induce a unitary (up to scale) on the register."""


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Interaction, ancilla preparation and measurement basis.

    ``interaction`` acts on (ancilla, register qubit). With two register
    qubits the same gate is applied to (ancilla, q1) and then (ancilla, q2).
    ``flavor`` records how the interaction was built ("controlled",
    "ising" or "custom"); it selects the default local correction for
    two-qubit branches.
    """

    interaction: np.ndarray
    prep: np.ndarray = PLUS_I
    basis: tuple = PM_I_BASIS[0]
    labels: tuple = PM_I_BASIS[1]
    num_register_qubits: int = 1
    alpha: float = math.pi / 8
    flavor: str = "custom"

    def __post_init__(self):
        u = np.asarray(self.interaction, dtype=complex)
        if u.shape != (4, 4) or not is_unitary(u, 1e-12):
            raise ValueError("interaction must be a 4x4 unitary")
        if self.num_register_qubits not in (1, 2):
            raise ValueError("num_register_qubits must be 1 or 2")
        if abs(np.linalg.norm(self.prep) - 1.0) > 1e-12:
            raise ValueError("ancilla preparation must be normalized")
        if len(self.basis) != 2 or len(self.labels) != 2:
            raise ValueError("measurement basis needs exactly two states")
        gram = np.array([[np.vdot(a, b) for b in self.basis] for a in self.basis])
        if np.max(np.abs(gram - np.eye(2))) > 1e-12:
            raise ValueError("measurement basis must be orthonormal")
        object.__setattr__(self, "interaction", u)

    @classmethod
    def controlled(cls, alpha: float = math.pi / 8, qubits: int = 1, **kw) -> "ChannelSpec":
        """``(H (x) H) . C`` with the controlled ``diag(e^{-2ia}, e^{2ia})``."""
        return cls(interaction(alpha), num_register_qubits=qubits, alpha=alpha,
                   flavor="controlled", **kw)

    @classmethod
    def ising(cls, alpha: float = math.pi / 8, qubits: int = 1, **kw) -> "ChannelSpec":
        """``(H (x) H) . exp(i alpha Z(x)Z)``, the fully symmetric flavor."""
        return cls(interaction(alpha, symmetric=True), num_register_qubits=qubits,
                   alpha=alpha, flavor="ising", **kw)

    def with_qubits(self, qubits: int) -> "ChannelSpec":
        return ChannelSpec(self.interaction, self.prep, self.basis, self.labels,
                           qubits, self.alpha, self.flavor)

    def full_unitary(self) -> np.ndarray:
        """Unitary on ancilla (x) register, ancilla most significant."""
        if self.num_register_qubits == 1:
            return self.interaction
        first = embed(self.interaction, (0, 1), 3)
        second = embed(self.interaction, (0, 2), 3)
        return second @ first

    def local_correction(self):
        """Per-qubit operators that undo the known local factors of a two-qubit branch."""
        if self.flavor == "ising":
            return (H, H)
        if self.flavor == "controlled":
            c = rz(-2 * self.alpha) @ H
            return (c, c)
        return None


@dataclass(frozen=True, eq=False)
class KrausBranch:
    outcome: str
    kraus: np.ndarray
    probability: float
    unitary: np.ndarray
    classification: IsingDecomposition | None = None


@dataclass(frozen=True, eq=False)
class BackActionReport:
    induced_states: tuple
    symmetric: bool
    planes_perpendicular: bool | None = None
    axes: tuple = field(default=())


def embed(op: np.ndarray, qubits, n: int) -> np.ndarray:
    """Matrix of ``op`` acting on ``qubits`` (in that order) of an ``n``-qubit system."""
    eye = np.eye(2**n, dtype=complex).reshape([2] * n + [2**n])
    return apply_gate(eye, op, qubits).reshape(2**n, 2**n)


def _kraus_operators(spec: ChannelSpec):
    u = spec.full_unitary()
    d = 2**spec.num_register_qubits
    eye = np.eye(d)
    col = np.kron(spec.prep.reshape(2, 1), eye)
    return [np.kron(m.conj().reshape(1, 2), eye) @ u @ col for m in spec.basis]


def stinespring_kraus(spec: ChannelSpec, classify: bool = True) -> list[KrausBranch]:
    """Kraus branches of ``spec`` in basis order.

    Zero-probability outcomes are dropped. Probabilities are state
    independent because each ``K`` is checked to be proportional to a
    unitary before ``Tr(K^dag K)/dim`` is taken.
    """
    d = 2**spec.num_register_qubits
    ops = _kraus_operators(spec)
    total = sum(k.conj().T @ k for k in ops)
    if np.max(np.abs(total - np.eye(d))) > 1e-10:
        raise ValueError("Kraus operators are not complete; interaction or prep is invalid")
    correction = spec.local_correction() if spec.num_register_qubits == 2 else None

    branches = []
    for label, k in zip(spec.labels, ops):
        kk = k.conj().T @ k
        p = float(np.trace(kk).real) / d
        if p <= _ZERO_BRANCH:
            continue
        if np.max(np.abs(kk - p * np.eye(d))) > _PROPORTIONAL_TOL:
            raise NonUnitaryBranchError(
                f"non-unitary branch for outcome {label!r}: the measurement basis is not "
                "symmetric with respect to the back-action states (|<m|a_j>| differ across j)"
            )
        u = k / math.sqrt(p)
        cls = None
        if classify and correction is not None:
            try:
                cls = classify_two_qubit_branch(u, correction)
            except ValueError:
                cls = None
        branches.append(KrausBranch(label, k, p, u, cls))
    return branches


def classify_two_qubit_branch(branch, local_correction) -> IsingDecomposition:
    """Ising form of ``(c1 (x) c2) . U`` for a two-qubit branch unitary ``U``."""
    u = branch.unitary if isinstance(branch, KrausBranch) else np.asarray(branch)
    if u.shape != (4, 4):
        raise ValueError("classify_two_qubit_branch needs a two-qubit branch")
    c1, c2 = local_correction
    residual = np.kron(c1, c2) @ u
    try:
        return ising_decompose(residual, atol=1e-9)
    except ValueError as exc:
        raise ValueError("unremoved local part: corrected branch is not diagonal") from exc


def ordered_generators(branches: list[KrausBranch]):
    """Branch unitaries, probabilities and labels, most probable first (stable)."""
    order = sorted(range(len(branches)), key=lambda i: -branches[i].probability)
    return (
        tuple(branches[i].unitary for i in order),
        tuple(branches[i].probability for i in order),
        tuple(branches[i].outcome for i in order),
    )


def generalized_family(n) -> list[KrausBranch]:
    """Branches of ``(H (x) H) . C(Z^(1/n))``, ordered so branch ``j`` is ``X^j H Z^(1/2n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    spec = ChannelSpec.controlled(math.pi / (4 * n))
    branches = stinespring_kraus(spec)
    even = H @ zroot(2 * n)
    return sorted(branches, key=lambda b: gate_distance(b.unitary, even) > 1e-9)


def _conditional_ancilla_ops(u4: np.ndarray):
    """``A_b`` with ``U (|psi> (x) |b>) = (A_b |psi>) (x) |r_b>`` for b in {0, 1}."""
    t = u4.reshape(2, 2, 2, 2)  # a_out, r_out, a_in, b
    ops = []
    for b in (0, 1):
        m = t[:, :, :, b].transpose(1, 0, 2).reshape(2, 4)
        w, s, vh = np.linalg.svd(m)
        if s[1] > 1e-9 * s[0]:
            raise ValueError("interaction does not act diagonally on the register (up to local gates)")
        a = (s[0] * vh[0]).reshape(2, 2)
        ops.append(a / math.sqrt(abs(np.linalg.det(a))))
    return ops


def _relative_axis(a0, a1, frame=None):
    r = a1 @ a0.conj().T
    if frame is not None:
        r = frame @ r @ frame.conj().T
    r = r / np.sqrt(np.linalg.det(r))
    return axis_angle(r)


def backaction(spec: ChannelSpec) -> BackActionReport:
    """Ancilla states conditioned on register basis inputs, just before measurement."""
    a0, a1 = _conditional_ancilla_ops(spec.interaction)
    ops = (a0, a1)
    if spec.num_register_qubits == 1:
        states = tuple(a @ spec.prep for a in ops)
    else:
        states = tuple(ops[b2] @ ops[b1] @ spec.prep for b1 in (0, 1) for b2 in (0, 1))
    states = tuple(s / np.linalg.norm(s) for s in states)

    symmetric = True
    for m in spec.basis:
        mags = [abs(np.vdot(m, s)) for s in states]
        if max(mags) - min(mags) > 1e-10:
            symmetric = False

    perpendicular = None
    axes = ()
    if spec.num_register_qubits == 2:
        # both axes expressed in the frame just before measurement (q2 = 0 branch)
        first = _relative_axis(a0, a1, frame=a0)
        second = _relative_axis(a0, a1)
        axes = (first.axis, second.axis)
        perpendicular = (not first.degenerate and not second.degenerate
                         and abs(float(np.dot(first.axis, second.axis))) <= 1e-9)
    return BackActionReport(states, symmetric, perpendicular, axes)
