import math

import numpy as np
import pytest

from rus_adqc.protocol import (
    ASYMMETRIC_TARGET_BETA, Program, Synth1q, Synth2q, asymmetric_gate_demo, bell_demo,
    circuit_from_json, count_ancillas, execute, fidelity, ideal_state, program_from_json,
)
from rus_adqc.qcore import H, I2, Z, gate_distance, ising, kron, random_state, rz, zroot

C2 = math.cos(math.pi / 8) ** 2


def test_empty_program():
    psi = random_state(3, np.random.default_rng(0))
    log = execute(Program(3, [], 0, initial_state=psi))
    assert log.total_ancillas == 0 and np.allclose(log.final_state, psi)


def test_single_step_hit():
    n = 400
    hits = 0
    for seed in range(n):
        log = execute(Program(1, [Synth1q(0, H @ zroot(4), 1e-9, cap=1)], seed))
        if not log.aborted:
            hits += 1
            expect = H @ zroot(4) @ np.array([1, 0])
            assert abs(np.vdot(expect, log.final_state)) ** 2 == pytest.approx(1, abs=1e-12)
            assert log.total_ancillas == 1
    se = math.sqrt(C2 * (1 - C2) / n)
    assert abs(hits / n - C2) <= 3 * se


def test_invariants_hold_over_a_mixed_program():
    # the symmetric gate only reaches the Clifford group on one qubit
    steps = [Synth1q(0, Z @ H, 1e-9), Synth1q(2, H, 1e-9),
             Synth2q(0, 2, math.pi / 4, 0.05), Synth2q(1, 0, 0.3, 0.05)]
    psi = random_state(3, np.random.default_rng(1))
    log = execute(Program(3, steps, 7, flavor="ising", initial_state=psi))
    assert not log.aborted
    assert log.max_norm_error <= 1e-10 and log.max_purity_error <= 1e-10
    assert all(f >= 1 - 1e-8 for f in log.agreement)
    assert log.total_ancillas == count_ancillas(log.trajectories)
    # the whole register evolution is the tracked unitary
    assert abs(np.vdot(log.register_unitary @ psi, log.final_state)) ** 2 == \
        pytest.approx(1, abs=1e-8)


def test_controlled_flavor_two_qubit_directive():
    log = execute(Program(2, [Synth2q(0, 1, math.pi / 4, 0.05)], 3))
    assert not log.aborted
    t = log.trajectories[0]
    assert t["final_distance"] <= 0.05
    assert len(t["local_walks"]) == 2 * t["stop_step"]


def test_same_seed_same_run():
    prog = Program(2, [Synth1q(0, H, 0.05), Synth2q(0, 1, math.pi / 4, 0.05)], 11, flavor="ising")
    a, b = execute(prog), execute(prog)
    assert a.trajectories == b.trajectories and np.array_equal(a.final_state, b.final_state)


def test_cap_aborts_with_partial_log():
    steps = [Synth1q(0, H, 1e-9), Synth1q(1, zroot(3), 1e-12, cap=10), Synth1q(0, H, 0.1)]
    log = execute(Program(2, steps, 0, flavor="ising"))
    assert log.aborted and len(log.trajectories) == 2
    assert log.trajectories[-1]["stop_step"] == "cap-reached"


@pytest.mark.parametrize("steps,n", [
    ([Synth1q(2, H)], 2),
    ([Synth2q(1, 1, 0.1)], 2),
    ([], 9),
    ([], 0),
])
def test_program_validation(steps, n):
    with pytest.raises(ValueError):
        Program(n, steps, 0)


def test_bell_demo():
    log = bell_demo(3)
    assert not log.aborted and log.fidelity >= 0.9
    assert log.frame.startswith("global phase and")


def test_fidelity_up_to_local_z():
    bell = np.array([1, 0, 0, 1]) / math.sqrt(2)
    twisted = kron(rz(2.1), rz(-1.3)) @ bell
    assert fidelity(twisted, bell) < 0.9
    assert fidelity(twisted, bell, up_to_local_z=True) == pytest.approx(1, abs=1e-10)


def test_identity_local_correction_is_free():
    log = execute(Program(1, [Synth1q(0, I2, 1e-9)], 0))
    assert log.trajectories[0]["stop_step"] == 0 and log.total_ancillas == 0


def test_asymmetric_gate_exact_mode():
    for seed in range(5):
        log = asymmetric_gate_demo(seed, mode="exact")
        assert log.target_distance <= 1e-8
        assert log.trajectories[0]["final_distance"] <= 1e-15


def test_asymmetric_gate_irrational_mode():
    dists = [asymmetric_gate_demo(seed, epsilon_beta=0.01).target_distance for seed in range(20)]
    assert max(dists) <= 0.05
    with pytest.raises(ValueError):
        asymmetric_gate_demo(0, mode="other")


def test_asymmetric_target():
    assert ASYMMETRIC_TARGET_BETA == pytest.approx(-math.pi / 8)


def test_json_front_ends():
    prog = program_from_json({
        "register_size": 2, "flavor": "ising",
        "steps": [{"type": "synth1q", "qubit": 0, "target": "H", "epsilon": 1e-9},
                  {"type": "synth2q", "qubits": [0, 1], "target_beta": -math.pi / 8,
                   "exact": "-3/8"}],
        "alpha": 0.5 * math.acos(math.sqrt(2) - 1),
    }, master_seed=4)
    assert prog.steps[1].exact == (-3, 8)
    circ = circuit_from_json({"gates": [{"name": "H", "qubits": [0]},
                                        {"name": "Ising", "param": 0.25, "qubits": [0, 1]}]})
    psi = ideal_state(circ, 2)
    assert np.allclose(psi, ising(0.25) @ kron(H, I2) @ np.array([1, 0, 0, 0]))
    with pytest.raises(ValueError, match="unknown directive"):
        program_from_json({"register_size": 1, "steps": [{"type": "bogus"}]}, 0)


def test_ideal_circuit_fidelity_is_reported():
    circ = [(H, (0,)), (Z, (0,))]
    log = execute(Program(1, [Synth1q(0, Z @ H, 1e-9, pauli_tolerant=False)], 2,
                          flavor="ising"), ideal=circ)
    assert log.fidelity == pytest.approx(1, abs=1e-12)
    assert gate_distance(log.register_unitary, Z @ H) <= 1e-12
