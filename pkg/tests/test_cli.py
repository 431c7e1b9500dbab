"""Command-line interface: exit codes, formats, and file handling."""

import json

import pytest

import acmdp
from acmdp.cli import main

QUEUE = [
    "--model", "queue", "--lambda", "0.3", "--sigma", "0.6",
    "--hc", "1.0", "--rc", "5.0",
]


def mixing():
    return acmdp.from_entries(
        n_states=1,
        actions=[[0, 1]],
        transitions=[(0, 0, 0, 1.0), (0, 1, 0, 1.0)],
        costs=[
            [(0, 0, 0.0), (0, 1, 1.0)],
            [(0, 0, 2.0), (0, 1, 0.0)],
        ],
    )


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "mixing.json"
    path.write_text(acmdp.save_instance(mixing()), encoding="utf-8")
    return path


@pytest.fixture
def queue_solution(tmp_path):
    path = tmp_path / "solution.json"
    assert main(["solve", *QUEUE, "--N", "6", "--format", "structured",
                 "--out", str(path)]) == 0
    return path


def test_validate_builtin(capsys):
    assert main(["validate", *QUEUE, "--N", "4"]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_instance_file(instance_file, capsys):
    assert main(["validate", "--input", str(instance_file)]) == 0
    assert "valid" in capsys.readouterr().out


def test_validate_bad_instance_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n_states": 2}', encoding="utf-8")
    assert main(["validate", "--input", str(bad)]) == 2


def test_solve_structured(tmp_path, capsys):
    out = tmp_path / "doc.json"
    assert main(["solve", *QUEUE, "--N", "10", "--format", "structured",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["value"] == pytest.approx(0.39961884342803866, abs=1e-9)
    assert "rho" in doc and "h" in doc and "gamma" in doc


def test_solve_human(capsys):
    assert main(["solve", *QUEUE, "--N", "4"]) == 0
    out = capsys.readouterr().out
    assert "value" in out


def test_solve_csv(capsys):
    assert main(["solve", *QUEUE, "--N", "4", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("state,")
    assert len(lines) == 6


def test_solve_missing_model_exits_1(capsys):
    assert main(["solve"]) == 1


def test_solve_missing_queue_flag_exits_1(capsys):
    assert main(["solve", "--model", "queue", "--lambda", "0.3"]) == 1


def test_missing_input_file_exits_1(tmp_path):
    assert main(["solve", "--input", str(tmp_path / "absent.json")]) == 1


def test_unknown_command_exits_1(capsys):
    assert main(["frobnicate"]) == 1


def test_solve_constrained(instance_file, capsys):
    assert main(["solve-constrained", "--input", str(instance_file),
                 "--kappa", "1.0"]) == 0
    out = capsys.readouterr().out
    assert "0.5" in out


def test_solve_constrained_infeasible_exits_3(tmp_path, capsys):
    m = acmdp.from_entries(
        n_states=1,
        actions=[[0]],
        transitions=[(0, 0, 0, 1.0)],
        costs=[[(0, 0, 1.0)], [(0, 0, 2.0)]],
    )
    path = tmp_path / "tight.json"
    path.write_text(acmdp.save_instance(m), encoding="utf-8")
    assert main(["solve-constrained", "--input", str(path), "--kappa", "1.0"]) == 3
    assert "infeasible" in capsys.readouterr().out


def test_solve_constrained_wrong_kappa_length_exits_1(instance_file, capsys):
    assert main(["solve-constrained", "--input", str(instance_file),
                 "--kappa", "1.0,2.0"]) == 1


def test_lex_structured(instance_file, tmp_path):
    out = tmp_path / "lex.json"
    assert main(["lex", "--input", str(instance_file), "--kappa", "2.0",
                 "--format", "structured", "--out", str(out)]) == 0
    doc = json.loads(out.read_text(encoding="utf-8"))
    assert doc["lex_values"][0] == pytest.approx(0.0, abs=1e-7)
    assert doc["lex_values"][1] == pytest.approx(2.0, abs=1e-7)


def test_lex_csv_rejected(instance_file):
    assert main(["lex", "--input", str(instance_file), "--kappa", "2.0",
                 "--format", "csv"]) == 1


def test_verify_clean(queue_solution, capsys):
    assert main(["verify", *QUEUE, "--N", "6",
                 "--solution", str(queue_solution)]) == 0
    assert "verified" in capsys.readouterr().out


def test_verify_tampered_exits_4(queue_solution, tmp_path, capsys):
    doc = json.loads(queue_solution.read_text(encoding="utf-8"))
    doc["value"] += 1e-3
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["verify", *QUEUE, "--N", "6", "--solution", str(tampered)]) == 4
    assert "violation" in capsys.readouterr().out


def test_simulate(queue_solution, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    assert main(["simulate", *QUEUE, "--N", "6", "--solution",
                 str(queue_solution), "--steps", "5000", "--seed", "3",
                 "--trace", str(trace)]) == 0
    out = capsys.readouterr().out
    assert "pathwise" in out
    lines = trace.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "step,state,action,c0"
    assert len(lines) == 5001


def test_simulate_structured(queue_solution, capsys):
    assert main(["simulate", *QUEUE, "--N", "6", "--solution",
                 str(queue_solution), "--steps", "2000", "--seed", "3",
                 "--format", "structured"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["generator"] == "philox4x64-10"
    assert doc["seed"] == 3
    assert doc["horizon"] == 2000


def test_sweep(capsys):
    assert main(["sweep", *QUEUE, "--sweep-N", "4,6,8"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "N,rho"
    assert len(lines) == 4
    assert lines[1].startswith("4,")


def test_sweep_requires_queue(capsys):
    assert main(["sweep", "--sweep-N", "4,6"]) == 1
    assert main(["sweep", *QUEUE]) == 1


def test_unknown_flag_exits_1(capsys):
    assert main(["solve", "--frob", "1"]) == 1


def test_help_exits_0(capsys):
    assert main(["--help"]) == 0


def test_oracle_agreement(queue_solution, capsys):
    assert main(["oracle", *QUEUE, "--N", "6",
                 "--solution", str(queue_solution)]) == 0
    out = capsys.readouterr().out
    assert "agree" in out


def test_oracle_disagreement_exits_4(queue_solution, tmp_path, capsys):
    doc = json.loads(queue_solution.read_text(encoding="utf-8"))
    doc["value"] += 0.05
    tampered = tmp_path / "wrong.json"
    tampered.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["oracle", *QUEUE, "--N", "6", "--solution", str(tampered)]) == 4


def test_out_files_end_with_newline(instance_file, tmp_path):
    out = tmp_path / "o.json"
    assert main(["solve", "--input", str(instance_file), "--format",
                 "structured", "--out", str(out)]) == 0
    assert out.read_bytes().endswith(b"\n")
