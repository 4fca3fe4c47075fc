"""Dense gate algebra for one and two qubits.

Operators are plain ``complex128`` numpy arrays of shape ``(2, 2)`` or
``(4, 4)``. States are 1-d complex arrays of length ``2**n``. Tensor
ordering is fixed everywhere: the ancilla (when present) is the most
significant factor and register qubits follow in index order.

Roots of Z use the trace-real convention
``Z^(1/n) = diag(exp(-i*pi/(2n)), exp(+i*pi/(2n)))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

import numpy as np

__all__ = [
    "I2", "X", "Y", "Z", "H", "PAULIS",
    "PLUS_I", "MINUS_I", "KET0", "KET1",
    "AxisAngle", "IsingDecomposition",
    "make_gate", "zroot", "xroot", "rz", "ising", "cphase", "interaction",
    "is_unitary", "unitarity_error", "gate_distance", "axis_angle",
    "from_axis_angle", "ising_decompose", "ising_reconstruct", "project_unitary",
    "kron", "dagger", "apply_gate", "random_unitary", "random_state",
]

_SQ2 = 1.0 / math.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS_I = np.array([1, 1j], dtype=complex) * _SQ2
MINUS_I = np.array([1, -1j], dtype=complex) * _SQ2

_ZZ_DIAG = np.array([1.0, -1.0, -1.0, 1.0])

for _m in (I2, X, Y, Z, H, KET0, KET1, PLUS_I, MINUS_I):
    _m.setflags(write=False)


def dagger(u: np.ndarray) -> np.ndarray:
    return u.conj().T


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def apply_gate(psi: np.ndarray, op: np.ndarray, axes) -> np.ndarray:
    """Apply ``op`` to ``axes`` of a tensor whose leading axes are qubits of size 2.

    Trailing axes beyond the qubits (e.g. matrix columns) are carried along.
    """
    k = len(axes)
    t = np.tensordot(op.reshape([2] * (2 * k)), psi, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(t, list(range(k)), list(axes))


def _finite(value, name="parameter") -> float:
    if isinstance(value, Fraction):
        value = float(value)
    if not isinstance(value, Real) or not math.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    return float(value)


def zroot(n) -> np.ndarray:
    """``Z^(1/n)`` in the trace-real convention."""
    n = _finite(n, "root order")
    if n < 1:
        raise ValueError(f"root order must be >= 1, got {n}")
    half = math.pi / (2.0 * n)
    return np.diag([np.exp(-1j * half), np.exp(1j * half)])


def xroot(n) -> np.ndarray:
    return H @ zroot(n) @ H


def rz(theta) -> np.ndarray:
    theta = _finite(theta, "angle")
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def ising(alpha) -> np.ndarray:
    """``exp(i * alpha * Z(x)Z)``."""
    alpha = _finite(alpha, "angle")
    return np.diag(np.exp(1j * alpha * _ZZ_DIAG))


def cphase(alpha) -> np.ndarray:
    """Ancilla-controlled ``diag(e^{-2i alpha}, e^{2i alpha})`` on the register.

    At ``alpha = pi/8`` the controlled operator is exactly ``Z^(1/2)``.
    Equal to ``(I (x) e^{-i alpha Z}) . ising(alpha)``.
    """
    alpha = _finite(alpha, "angle")
    return np.diag([1, 1, np.exp(-2j * alpha), np.exp(2j * alpha)]).astype(complex)


def interaction(alpha, symmetric: bool = False) -> np.ndarray:
    """Fixed ancilla-register gate ``(H (x) H) . U`` with ``U`` controlled or Ising."""
    core = ising(alpha) if symmetric else cphase(alpha)
    return np.kron(H, H) @ core


_FIXED = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H}
_PARAM = {
    "Zroot": zroot,
    "Xroot": xroot,
    "Rz": rz,
    "Ising": ising,
    "CPhase": cphase,
    "E": interaction,
}


def make_gate(name: str, parameter=None) -> np.ndarray:
    """Build a named gate.

    ``T`` is accepted as shorthand for ``Zroot(4)``.

    >>> np.allclose(make_gate("Zroot", 2), np.diag(np.exp([-1j*np.pi/4, 1j*np.pi/4])))
    True
    """
    if name == "T":
        name, parameter = "Zroot", 4
    if name in _FIXED:
        if parameter is not None:
            raise ValueError(f"gate {name} takes no parameter")
        return _FIXED[name].copy()
    if name in _PARAM:
        if parameter is None:
            raise ValueError(f"gate {name} requires a parameter")
        return _PARAM[name](parameter)
    raise ValueError(f"unknown gate name {name!r}")


def unitarity_error(u: np.ndarray) -> float:
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_error(u) <= atol


def project_unitary(u: np.ndarray) -> np.ndarray:
    """Closest unitary in Frobenius norm (polar factor)."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def gate_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Phase-insensitive distance ``1 - |Tr(U^dag V)| / dim``, in ``[0, 1]``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = 1.0 - abs(np.vdot(u, v)) / u.shape[0]
    return min(1.0, max(0.0, d))


@dataclass(frozen=True)
class AxisAngle:
    """``U = e^{i g} exp(-i (angle/2) axis . sigma)`` with ``angle`` in ``[0, pi]``."""

    axis: np.ndarray
    angle: float
    global_phase: float = 0.0
    degenerate: bool = False

    @property
    def half_angle_cos(self) -> float:
        return math.cos(self.angle / 2.0)


def axis_angle(u: np.ndarray, degenerate_tol: float = 1e-6) -> AxisAngle:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, 1e-10):
        raise ValueError("axis_angle expects a 2x2 unitary")
    phase = 0.5 * np.angle(np.linalg.det(u))
    v = u * np.exp(-1j * phase)
    # v = a I - i (b . sigma), a and b real
    a = 0.5 * np.trace(v)
    b = np.array([0.5j * np.trace(v @ p) for p in (X, Y, Z)])
    if a.real < 0:
        a, b, phase = -a, -b, phase + math.pi
    a, b = a.real, b.real
    s = float(np.linalg.norm(b))
    if s <= degenerate_tol:
        return AxisAngle(np.array([0.0, 0.0, 1.0]), 0.0, _wrap(phase), True)
    return AxisAngle(b / s, 2.0 * math.atan2(s, a), _wrap(phase), False)


def from_axis_angle(aa: AxisAngle) -> np.ndarray:
    nx, ny, nz = aa.axis
    half = aa.angle / 2.0
    gen = nx * X + ny * Y + nz * Z
    return np.exp(1j * aa.global_phase) * (math.cos(half) * I2 - 1j * math.sin(half) * gen)


def _wrap(theta: float) -> float:
    """Map into ``(-pi, pi]``."""
    t = math.remainder(theta, 2.0 * math.pi)
    return math.pi if t == -math.pi else t


def _wrap_half(theta: float) -> float:
    """Map into ``(-pi/2, pi/2]``."""
    t = math.remainder(theta, math.pi)
    return math.pi / 2 if t <= -math.pi / 2 else t


@dataclass(frozen=True)
class IsingDecomposition:
    """``e^{i g} (e^{i z1 Z} (x) e^{i z2 Z}) e^{i beta Z(x)Z}`` for a diagonal 4x4 unitary.

    Angles on a diagonal are only fixed up to the lattice generated by
    ``beta -> beta + pi/2`` with ``z1, z2 -> z1 - pi/2, z2 - pi/2``. The
    gauge is fixed by ``z1`` in ``[-pi/4, pi/4)``; ``z2`` and ``beta`` are
    reported in ``(-pi/2, pi/2]``.
    """

    global_phase: float
    z1: float
    z2: float
    beta: float


def ising_reconstruct(d: IsingDecomposition) -> np.ndarray:
    s = np.array([1.0, 1.0, -1.0, -1.0])
    t = np.array([1.0, -1.0, 1.0, -1.0])
    phases = d.global_phase + d.z1 * s + d.z2 * t + d.beta * _ZZ_DIAG
    return np.diag(np.exp(1j * phases))


def ising_decompose(u: np.ndarray, atol: float = 1e-10) -> IsingDecomposition:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("ising_decompose expects a 4x4 operator")
    diag = np.diag(u)
    if np.max(np.abs(u - np.diag(diag))) > atol:
        raise ValueError("ising_decompose expects a diagonal operator")
    if np.max(np.abs(np.abs(diag) - 1.0)) > 1e-8:
        raise ValueError("ising_decompose expects a unitary operator")
    ref = float(np.angle(diag[0]))
    p00, p01, p10, p11 = (0.0, *np.angle(diag[1:] / diag[0]))
    g = (p00 + p01 + p10 + p11) / 4 + ref
    z1 = float(p00 + p01 - p10 - p11) / 4
    z2 = (p00 - p01 + p10 - p11) / 4
    beta = (p00 - p01 - p10 + p11) / 4

    # gauge: z1 into [-pi/4, pi/4) by the pi/2 lattice move
    k = math.floor((z1 + math.pi / 4 + 1e-12) / (math.pi / 2))
    z1 -= k * math.pi / 2
    z2 -= k * math.pi / 2
    beta += k * math.pi / 2
    g += k * math.pi / 2
    # a pi shift of z2 or beta only flips the overall sign
    z2_red, beta_red = _wrap_half(z2), _wrap_half(beta)
    g += math.pi * (round((z2 - z2_red) / math.pi) + round((beta - beta_red) / math.pi))
    return IsingDecomposition(_wrap(g), z1, z2_red, beta_red)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    return v / np.linalg.norm(v)
