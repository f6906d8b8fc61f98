import json
import subprocess
import sys

import pytest

from cbnorm import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out


def payload(out):
    return json.loads(out.out)


def test_choi_of_transpose(capsys):
    code, out = run(capsys, "choi", "--map", "transpose:2")
    body = payload(out)
    assert code == 0 and body["in_dim"] == 2
    assert body["predicates"]["trace_preserving"]
    assert body["config"] == {"command": "choi", "tol": 1e-7, "restarts": 50, "seed": 0,
                              "sdp_tol": 1e-7}


@pytest.mark.parametrize("spec,code", [("block:2:4:1", 0), ("transpose:2", 2)])
def test_certify_exit_codes(capsys, spec, code):
    assert run(capsys, "certify-isometry", "--map", spec)[0] == code


def test_extract_refusal_exits_two(capsys):
    code, out = run(capsys, "extract-structure", "--map", "transpose:2")
    assert code == 2 and payload(out)["verdict"] is False


def test_saturation(capsys):
    code, out = run(capsys, "saturation", "--map", "transpose:2", "--k", "2", "--restarts", "5")
    body = payload(out)
    assert code == 0 and body["saturation"]["info"]["status"] == "saturated"
    code, _ = run(capsys, "saturation", "--map", "transpose:2", "--k", "3", "--restarts", "5")
    assert code == 2


def test_game_round_trip_through_files(capsys, tmp_path):
    game = tmp_path / "g.json"
    code = cli.main(["game-construct", "--r", "0.25", "--psi0", "block:2:4:0",
                     "--psi1", "block:2:4:1", "--output", str(game)])
    assert code == 0
    code, out = run(capsys, "game-decompose", "--game", str(game), "--restarts", "5")
    assert code == 0 and payload(out)["r"] == pytest.approx(0.25, abs=1e-8)


def test_seed_flag_beats_environment(capsys, monkeypatch):
    monkeypatch.setenv("CBNORM_SEED", "9")
    assert payload(run(capsys, "choi", "--map", "identity:2")[1])["config"]["seed"] == 9
    out = run(capsys, "choi", "--map", "identity:2", "--seed", "4")[1]
    assert payload(out)["config"]["seed"] == 4
    monkeypatch.setenv("CBNORM_SEED", "x")
    assert run(capsys, "choi", "--map", "identity:2")[0] == 1


def test_malformed_json_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "choi",\n  "in_dim": }')
    code, out = run(capsys, "choi", "--map", str(bad))
    assert code == 1 and "line 2, column" in out.err


@pytest.mark.parametrize("spec", ["transpose:0", "transpose", "block:2:3:1", "nosuch.json",
                                  "identity:x"])
def test_bad_map_specs(capsys, spec):
    assert run(capsys, "choi", "--map", spec)[0] == 1


def test_text_format(capsys):
    code, out = run(capsys, "certify-isometry", "--map", "block:1:2:1", "--format", "text")
    assert code == 0 and "verdict: True" in out.out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cbnorm.cli", "choi", "--map", "identity:1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["out_dim"] == 1
