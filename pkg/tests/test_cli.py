import json
import subprocess
import sys
from pathlib import Path

import pytest

from linvariant.cli import main, parse_input, render_text
from linvariant.linv_engine import modular_form_module

DATA = Path(__file__).parent / "data"
SAMPLE = str(DATA / "modular_k1_lambda2.json")
DEMO = ["--demo-modular", "p=3", "k=1", "lambda=2/1"]


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_sample_file_is_the_modular_module():
    inp = parse_input(SAMPLE)
    ref = modular_form_module(3, 1, 2)
    assert inp.M == ref.M and inp.D == ref.D


def test_l_invariant_demo(capsys):
    code, out = run_json(capsys, ["l-invariant"] + DEMO)
    assert code == 0
    assert out["result"]["L_loc"] == "2/1" and out["result"]["E"] == "1/1"


def test_text_and_json_carry_the_same_numbers(capsys):
    code, out = run_json(capsys, ["l-invariant", "--input", SAMPLE])
    assert code == 0
    main(["l-invariant", "--input", SAMPLE])
    text = capsys.readouterr().out.splitlines()
    assert text == render_text(out)
    assert "result.L_loc: 2/1" in text


@pytest.mark.parametrize("cmd", ["inspect", "filtration", "cohomology", "triangulate"])
def test_module_commands(capsys, cmd):
    code, out = run_json(capsys, [cmd, "--input", SAMPLE])
    assert code == 0 and out["command"] == cmd


def test_fm_extract_demo(capsys):
    code, out = run_json(capsys, ["fm-extract"] + DEMO)
    assert code == 0 and out["result"]["lambda"] == "2/1"


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 3,\n  "dim": 2,\n  "phi": [[1, 0]\n}')
    code, out = run_json(capsys, ["inspect", "--input", str(bad)])
    assert code == 3
    err = out["error"]
    assert err["type"] == "JsonParseError" and err["line"] == 4 and err["column"] >= 1


def test_missing_field_names_it(tmp_path, capsys):
    obj = json.loads(Path(SAMPLE).read_text())
    del obj["N"]
    f = tmp_path / "noN.json"
    f.write_text(json.dumps(obj))
    code, out = run_json(capsys, ["inspect", "--input", str(f)])
    assert code == 3 and out["error"]["type"] == "SchemaError" and out["error"]["field"] == "N"


def test_non_square_phi(tmp_path, capsys):
    obj = json.loads(Path(SAMPLE).read_text())
    obj["phi"] = [["1", "0"]]
    f = tmp_path / "phi.json"
    f.write_text(json.dumps(obj))
    code, out = run_json(capsys, ["inspect", "--input", str(f)])
    assert code == 3 and out["error"]["type"] == "SchemaError"


def test_condition_failure_exit_code(tmp_path, capsys):
    obj = json.loads(Path(SAMPLE).read_text())
    obj["N"] = [["0", "0"], ["0", "0"]]
    obj["filtration"][1]["basis"] = [["-3", "1"]]
    f = tmp_path / "crys.json"
    f.write_text(json.dumps(obj))
    code, out = run_json(capsys, ["l-invariant", "--input", str(f)])
    assert code == 2 and out["error"]["type"] == "C4Violation"


def test_bad_arguments_exit_3(capsys):
    assert main(["no-such-command"]) == 3
    assert main(["l-invariant", "--demo-modular", "p=4", "k=1", "lambda=1"]) == 3
    capsys.readouterr()


def test_verify_command(capsys):
    code, out = run_json(capsys, ["verify", "--window", "-8:80", "--p", "3"])
    assert code == 0 and out["result"]["ok"]


def test_tables_command(tmp_path, capsys):
    cache = tmp_path / "t.json"
    code, out = run_json(capsys, ["tables", "--p", "3", "--m-max", "1", "--k-max", "1",
                                  "--table-cache", str(cache), "--precision", "20"])
    assert code == 0 and all(e["matches_package_table"] for e in out["result"]["entries"])
    assert cache.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "linvariant", "l-invariant", *DEMO],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "L_loc: 2/1" in proc.stdout
