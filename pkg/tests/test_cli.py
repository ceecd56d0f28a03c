import io
import json
import subprocess
import sys

import pytest

from icldt.cli import main, parse_args, run

from conftest import THEORIES

SEC21 = str(THEORIES / "test_treat.icl")
SEC51 = str(THEORIES / "full_obs.icl")
EMPTY = str(THEORIES / "empty.icl")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(parse_args(list(argv)), out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_empty():
    code, out, _ = call("validate", EMPTY)
    assert code == 0
    assert "0 errors" in out


def test_validate_json(tmp_path):
    bad = tmp_path / "bad.icl"
    bad.write_text("nature n { a: 0.5, b: 0.6 }. utility(0).")
    code, out, _ = call("validate", str(bad), "--format", "json")
    assert code == 1
    doc = json.loads(out)
    assert not doc["ok"] and doc["errors"][0]["code"] == "PROB_SUM"
    code, _, _ = call("validate", str(bad), "--tolerance", "0.2")
    assert code == 0


def test_solve_full_obs_text():
    code, out, _ = call("solve", SEC51)
    assert code == 0
    for line in ("⟨d1, {a1}, 7⟩", "⟨d2, {a2, c2, e1}, 6⟩", "⟨d1, {a2, c1, e1}, 7⟩", "⟨d2, {a2, c1, e2}, 9⟩"):
        assert line in out
    assert "indifferent {a2, c2, e2}" in out


def test_explain_query():
    code, out, _ = call("explain", SEC21, "--query", "bs(pos)", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["explanations"]) == 2
    assert doc["probability"] == 0.59


def test_explain_with_decision_atoms():
    code, out, _ = call("explain", SEC21, "--query", "utility(10)")
    assert code == 0
    assert "probability undefined" in out


def test_parse_error_exit(tmp_path):
    bad = tmp_path / "bad.icl"
    bad.write_text("nature n { a: 0.5 b: 0.5 }.")
    code, _, err = call("solve", str(bad))
    assert code == 2
    assert "1:19" in err


def test_invalid_theory_exit(tmp_path):
    bad = tmp_path / "bad.icl"
    bad.write_text("p <- q. q <- p. utility(0).")
    code, _, err = call("solve", str(bad))
    assert code == 1 and "CYCLIC_PROGRAM" in err


def test_resource_bound_exit():
    code, _, err = call("oracle", SEC21, "--max-strategies", "10")
    assert code == 3 and "TOO_LARGE" in err


def test_oracle_output():
    code, out, _ = call("oracle", SEC21, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["strategies"] == 13122 and doc["value"] == 8.51


@pytest.mark.parametrize("theory", [SEC21, SEC51])
def test_solve_then_evaluate_is_bit_for_bit(tmp_path, theory):
    strategy = tmp_path / "s.txt"
    code, out, _ = call("solve", theory, "--strategy-out", str(strategy))
    assert code == 0
    solved = out.strip().splitlines()[-1]
    code, out, _ = call("evaluate", theory, "--strategy", str(strategy))
    assert code == 0
    assert out.strip() == solved


def test_evaluate_handwritten_strategy(tmp_path):
    strategy = tmp_path / "s.txt"
    strategy.write_text("ta: -> ta(hi)\nd: default -> d(0)\n")
    code, out, _ = call("evaluate", SEC21, "--strategy", str(strategy))
    assert code == 0 and out.strip() == "value 4.0"


def test_outputs_are_deterministic():
    runs = {call("solve", SEC21, "--format", "json")[1] for _ in range(3)}
    assert len(runs) == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "icldt", "explain", SEC21, "--query", "bs(pos)"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert "probability 0.59" in proc.stdout


def test_main_returns_status(capsys):
    assert main(["validate", SEC21]) == 0
    assert "0 errors" in capsys.readouterr().out


def test_solve_empty_theory():
    code, out, _ = call("solve", EMPTY, "--format", "json")
    assert code == 0
    assert json.loads(out) == {"decisions": [], "value": 0.0}
