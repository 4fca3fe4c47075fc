import json
import math

import numpy as np
import pytest

from rus_adqc.qcore import H, I2, X, Z, gate_distance, is_unitary, unitarity_error, xroot, zroot
from rus_adqc.serialization import dumps
from rus_adqc.synth1q import (
    REUNITARIZE_EVERY, HittingStats, SynthTarget, default_generators, expected_time_upper_bound,
    finite_group_walk, hitting_stats, run_until, sample_outcomes, step,
)

GENS, PROBS = default_generators()
C2 = math.cos(math.pi / 8) ** 2


def test_first_step_from_identity():
    assert gate_distance(step(I2, 0, GENS), H @ zroot(4)) <= 1e-12


def test_two_even_steps_are_x_then_z_quarter_roots():
    u = step(step(I2, 0, GENS), 0, GENS)
    assert gate_distance(u, xroot(4) @ zroot(4)) <= 1e-12


def test_mixed_pair_up_to_pauli():
    u = step(step(I2, 1, GENS), 0, GENS)
    target = np.linalg.inv(xroot(4)) @ zroot(4)
    assert min(gate_distance(p @ u, target) for p in (I2, X, Z, X @ Z)) <= 1e-12


def test_identity_target_stops_immediately():
    t = run_until(SynthTarget(I2, 1e-9), 0)
    assert t.stop_step == 0 and t.outcomes == ""


def test_single_step_hit_rate():
    target = SynthTarget(H @ zroot(4), 1e-9, cap=1)
    n = 10_000
    hits = sum(run_until(target, s).stop_step == 1 for s in range(n))
    se = math.sqrt(C2 * (1 - C2) / n)
    assert abs(hits / n - C2) <= 3 * se


def test_outcome_frequencies():
    o = sample_outcomes(PROBS, 100_000, seed=11)
    p = 1 - o.mean()
    assert abs(p - C2) <= 3 * math.sqrt(C2 * (1 - C2) / 1e5)


def test_accumulated_matches_outcome_product():
    t = run_until(SynthTarget(zroot(4), 0.05), 5, keep_history=True)
    assert not t.capped
    u = I2
    for k, o in enumerate(t.outcomes, 1):
        u = GENS[int(o)] @ u
        assert np.allclose(t.history[k], u, atol=1e-10)
    assert t.final_distance == pytest.approx(gate_distance(t.accumulated, zroot(4)), abs=1e-15)
    assert t.final_distance <= 0.05


def test_t_target_mostly_succeeds():
    stats = hitting_stats(SynthTarget(zroot(4), 0.05, cap=10**6), 1000, seed=2)
    assert stats.failure_count <= 10
    assert 20 < stats.mean < 200


def test_determinism_byte_for_byte():
    target = SynthTarget(H, 0.02)
    a = dumps(run_until(target, 99).to_dict())
    b = dumps(run_until(target, 99).to_dict())
    assert a == b
    assert json.loads(a)["seed"] == 99


def test_cap_flags_without_raising():
    t = run_until(SynthTarget(zroot(3), 1e-12, cap=50), 1)
    assert t.capped and len(t.outcomes) == 50
    assert t.to_dict()["stop_step"] == "cap-reached"


def test_long_walk_stays_unitary():
    gens = tuple(np.asarray(g) * (1 + 1e-13) for g in GENS)
    t = run_until(SynthTarget(zroot(3), 1e-15, cap=3 * REUNITARIZE_EVERY + 7), 4, gens, PROBS)
    assert t.capped
    assert unitarity_error(t.accumulated) <= 1e-8


def test_million_step_walk_stays_unitary():
    t = run_until(SynthTarget(zroot(3), 1e-15, cap=10**6), 4)
    assert t.capped and unitarity_error(t.accumulated) <= 1e-8


def test_pauli_tolerant_mode_reports_byproduct():
    # X H Z^(1/4) is one odd outcome away; tolerant mode accepts it as H Z^(1/4)
    target = SynthTarget(H @ zroot(4), 1e-9, cap=1, pauli_tolerant=True)
    hits = [run_until(target, s) for s in range(40)]
    assert all(t.stop_step == 1 for t in hits)
    assert {t.pauli for t in hits} == {"I", "X"}


@pytest.mark.parametrize("kw", [{"epsilon": 0.0}, {"epsilon": 1.5}, {"cap": 0}])
def test_target_validation(kw):
    with pytest.raises(ValueError):
        SynthTarget(H, **kw)
    with pytest.raises(ValueError):
        SynthTarget(np.ones((2, 2)))


def test_upper_bound():
    assert expected_time_upper_bound([("H", 1)], {"H": 40}) == 40
    assert expected_time_upper_bound([("H", 2), ("T", 3)], {"H": 40, "T": 25}) == 155
    with pytest.raises(ValueError, match="missing"):
        expected_time_upper_bound([("S", 1)], {"H": 1})


def test_stats_from_steps():
    s = HittingStats.from_steps([1, 2, 3, -1])
    assert s.failure_count == 1 and s.mean == 2.0 and s.trials == 4


def test_parallel_trials_match_serial():
    target = SynthTarget(zroot(4), 0.1)
    a = hitting_stats(target, 16, seed=3)
    b = hitting_stats(target, 16, seed=3, workers=2)
    assert np.array_equal(a.stop_steps, b.stop_steps)


def test_finite_group_walk():
    gens, probs = default_generators(flavor="ising")
    assert gate_distance(gens[0], H) <= 1e-12 and gate_distance(gens[1], H @ Z) <= 1e-12
    assert probs[1] == pytest.approx(math.sin(math.pi / 8) ** 2, abs=1e-12)
    rep = finite_group_walk(trials=2000, seed=1)
    assert rep.order == 8
    rep.index_of(X)  # X = H Z H is in the closure
    h = rep.stats[rep.index_of(H)]
    assert h.failure_count == 0 and h.mean < 100
    assert rep.stats[rep.index_of(I2)].mean == 0


def test_finite_group_walk_rejects_dense_generators():
    with pytest.raises(ValueError, match="not a finite group"):
        finite_group_walk(GENS, PROBS, trials=1, max_order=500)


def test_default_generators_are_unitary():
    assert all(is_unitary(g) for g in GENS)
