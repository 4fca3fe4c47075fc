import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from rus_adqc import __version__
from rus_adqc.cli import dispatch, parse_angle
from rus_adqc.qcore import zroot
from rus_adqc.serialization import operator_to_json

DEMOS = Path(__file__).resolve().parents[1] / "demos" / "programs"


def run(*argv):
    code, out = dispatch(list(argv))
    return code, out


def test_kraus_two_branches():
    code, out = run("kraus", "--alpha", "0.3926990817", "--qubits", "1")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["branches"]) == 2
    assert sum(b["probability"] for b in doc["branches"]) == pytest.approx(1, abs=1e-10)
    assert doc["header"]["version"] == __version__


def test_kraus_two_qubit_reports_beta():
    code, out = run("kraus", "--qubits", "2")
    doc = json.loads(out)
    assert code == 0 and all("beta" in b for b in doc["branches"])
    assert doc["backaction"]["planes_perpendicular"] is True


def test_kraus_asymmetric_basis_is_rejected():
    code, out = run("kraus", "--basis", "computational")
    assert code == 2 and out == ""


def test_synth1q_max_tolerance():
    code, out = run("synth1q", "--target", "H", "--epsilon", "1", "--seed", "7")
    assert code == 0
    assert json.loads(out)["trajectory"]["stop_step"] in (0, 1)


def test_header_embeds_config_and_seed():
    _, out = run("synth1q", "--target", "T", "--epsilon", "0.1", "--seed", "3")
    h = json.loads(out)["header"]
    assert h["seed"] == 3 and h["config"]["epsilon"] == 0.1 and h["config"]["target"] == "T"


def test_byte_determinism():
    args = ("synth2q", "--target-beta", "pi/4", "--seed", "12")
    assert run(*args) == run(*args)


def test_hitting_stats_csv():
    code, out = run("hitting-stats", "--target", "T", "--epsilon", "0.05",
                    "--trials", "1000", "--seed", "1")
    assert code == 0
    lines = out.splitlines()
    summary = json.loads(lines[1].removeprefix("# summary "))
    assert {"mean", "median", "p95", "failure_count"} <= set(summary)
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[2:]))))
    assert list(rows[0]) == ["trial", "stop_step", "final_distance", "capped"]
    assert len(rows) == 1000 and [int(r["trial"]) for r in rows] == list(range(1000))


def test_threads_do_not_change_output(monkeypatch):
    args = ("hitting-stats", "--target", "T", "--epsilon", "0.1", "--trials", "20", "--seed", "5")
    serial = run(*args)
    monkeypatch.setenv("RUS_ADQC_THREADS", "2")
    assert run(*args)[1].splitlines()[1:] == serial[1].splitlines()[1:]


def test_cap_reached_exit_code_keeps_output():
    code, out = run("synth1q", "--target", "Zroot(3)", "--epsilon", "1e-12", "--cap", "5",
                    "--seed", "0")
    assert code == 3 and json.loads(out)["trajectory"]["stop_step"] == "cap-reached"


def test_synth2q_exact_mode():
    alpha = 0.5 * math.acos(math.sqrt(2) - 1)
    code, out = run("synth2q", "--alpha", repr(alpha), "--target-beta=-pi/8",
                    "--epsilon", "1e-9", "--exact=-3/8", "--seed", "2")
    assert code == 0
    assert json.loads(out)["trajectory"]["final_distance"] <= 1e-12


def test_target_from_file(tmp_path):
    f = tmp_path / "t.json"
    f.write_text(json.dumps(operator_to_json(zroot(4))))
    code, out = run("synth1q", "--target", str(f), "--epsilon", "0.05", "--seed", "1")
    assert code == 0


def test_simulate(tmp_path):
    out_file = tmp_path / "run.json"
    code, out = run("simulate", "--program", str(DEMOS / "bell.json"),
                    "--ideal", str(DEMOS / "bell_ideal.json"), "--up-to-local-z",
                    "--seed", "5", "--output", str(out_file))
    assert code == 0 and out == ""
    doc = json.loads(out_file.read_text())
    assert doc["run"]["fidelity"] >= 0.9


@pytest.mark.parametrize("argv", [
    ("synth1q", "--target", "H"),                                    # no seed
    ("synth1q", "--target", "H", "--seed", "-1"),
    ("synth1q", "--target", "H", "--seed", str(2**64)),
    ("synth1q", "--target", "H", "--seed", "1", "--epsilon", "nan"),
    ("synth1q", "--target", "H", "--seed", "1", "--epsilon", "0"),
    ("synth1q", "--target", "H", "--seed", "1", "--epsilon", "2"),
    ("synth1q", "--target", "Bogus", "--seed", "1"),
    ("synth1q", "--target", "H", "--seed", "1", "--cap", "0"),
    ("synth2q", "--alpha", "pi/4", "--target-beta", "0.1", "--seed", "1"),
    ("synth2q", "--target-beta", "0.1", "--seed", "1", "--exact", "1/3"),
    ("simulate", "--program", "/nonexistent.json", "--seed", "1"),
    ("frobnicate",),
    ("synth1q", "--target", "H", "--seed", "1", "--unknown-flag"),
])
def test_validation_errors(argv, capsys):
    code, out = run(*argv)
    assert code == 2 and out == ""
    assert capsys.readouterr().err


def test_parse_angle():
    assert parse_angle("pi/8") == pytest.approx(math.pi / 8)
    assert parse_angle("-3pi/8") == pytest.approx(-3 * math.pi / 8)
    assert parse_angle("0.25") == 0.25


def test_module_entry_point_usage_on_stderr():
    p = subprocess.run([sys.executable, "-m", "rus_adqc", "synth1q", "--nope"],
                       capture_output=True, text=True)
    assert p.returncode == 2 and "usage" in p.stderr and p.stdout == ""
    p = subprocess.run([sys.executable, "-m", "rus_adqc", "version"], capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["version"] == __version__
