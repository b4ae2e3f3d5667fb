import json
import pathlib
import subprocess
import sys

import pytest

from algext.cli import main
from algext.errors import ParseError
from algext.scenario import evaluate_expression, parse_scenario
from algext.core import CharacterSpace

SCENARIOS = sorted((pathlib.Path(__file__).parent.parent / "scenarios").glob("*.json"))


def read_dir(d):
    return {p.name: p.read_bytes() for p in sorted(pathlib.Path(d).iterdir())}


def write(tmp_path, data, name="sc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_shipped_scenarios_are_deterministic(path, tmp_path):
    assert main(["run", str(path), "--out", str(tmp_path / "a")]) == 0
    assert main(["run", str(path), "--out", str(tmp_path / "b")]) == 0
    a, b = read_dir(tmp_path / "a"), read_dir(tmp_path / "b")
    assert a == b and "manifest.json" in a


def test_artifact_formats(tmp_path):
    path = [p for p in SCENARIOS if p.stem == "log_circle"][0]
    assert main(["run", str(path), "--out", str(tmp_path)]) == 0
    files = read_dir(tmp_path)
    assert files["00-winding.csv"].decode().splitlines() == ["# schema: winding/v1", "loop,winding", "loop0,1"]
    manifest = json.loads(files["manifest.json"])
    assert [t["op"] for t in manifest["tasks"]] == ["winding", "extend", "tower", "region-5323", "report"]
    assert manifest["tasks"][2]["summary"]["coverage"] == [0.0, 1.0, 1.0]
    text = files["manifest.json"].decode()
    assert text == json.dumps(json.loads(text), sort_keys=True, indent=2) + "\n"


def test_empty_task_list_writes_nothing(tmp_path):
    sc = write(tmp_path, {"space": {"kind": "interval", "n": 4}, "tasks": []})
    out = tmp_path / "out"
    assert main(["run", sc, "--out", str(out)]) == 0
    assert not out.exists()


def test_parse_errors_exit_2(tmp_path, capsys):
    bad_expr = write(tmp_path, {"space": {"kind": "interval", "n": 4}, "elements": {"a": "__import__('os')"}})
    assert main(["run", bad_expr, "--out", str(tmp_path / "o")]) == 2
    unknown = write(tmp_path, {"space": {"kind": "interval", "n": 4}, "colour": 1}, "u.json")
    assert main(["run", unknown, "--out", str(tmp_path / "o")]) == 2
    assert main(["run", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")]) == 2
    assert main(["winding", "--space", "circle", "--n", "16", "--element", "z +"]) == 2
    assert "parse error" in capsys.readouterr().err


def test_task_failures_exit_1(tmp_path):
    # a failed expectation, a vanishing loop element and a bad epsilon are task failures
    sc = write(tmp_path, {"space": {"kind": "circle", "n": 16}, "tasks": [
        {"op": "winding", "element": "z", "expect": {"windings": [0]}}]})
    assert main(["run", sc, "--out", str(tmp_path / "o")]) == 1
    assert main(["winding", "--space", "circle", "--n", "16", "--element", "z - 1"]) == 1
    assert main(["approx-invert", "--space", "interval", "--n", "8", "--poly", "0,0",
                 "--coeffs", "t,1", "--epsilon", "-1"]) == 1


def test_subcommands(tmp_path, capsys):
    assert main(["winding", "--space", "circle", "--n", "64", "--element", "z**2"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "loop0,2"
    assert main(["fibration", "--space", "interval", "--n", "64",
                 "--roots", "exp(i*pi*t),exp(-i*pi*t)", "--out", str(tmp_path / "f")]) == 0
    assert '"cyclic": 1' in capsys.readouterr().out
    assert main(["region-5323", "--out", str(tmp_path / "r")]) == 0
    region = json.loads((tmp_path / "r" / "00-region-5323.json").read_text())
    assert region["arcs"][0]["lo_closed"] is False and region["arcs"][0]["hi_closed"] is True
    assert main(["approx-invert", "--space", "interval", "--n", "8", "--poly", "0,0",
                 "--coeffs", "0,1", "--strategy", "chain", "--seed", "5"]) == 0
    assert main(["extend", "cole", "--space", "interval", "--n", "2", "--poly=-1,0",
                 "--f", "2*t", "--out", str(tmp_path / "c")]) == 0
    out = capsys.readouterr().out
    assert '"distance_after": 1.0' in out
    assert main(["tower", "--space", "circle", "--n", "64", "--rounds", "1", "--test", "z"]) == 0
    assert main(["report", "--space", "circle", "--n", "8", "--element", "z"]) == 0
    assert main(["t-operator", "--space", "interval", "--n", "16", "--poly=-1,0", "--coeffs", "t,1"]) == 0
    assert main(["log-descent", "--space", "interval", "--n", "16", "--poly=-1,0",
                 "--f", "exp(t)", "--h", "t"]) == 0
    assert main(["extend", "log", "--space", "circle", "--n", "32", "--element", "z"]) == 0


def test_module_entry_point(tmp_path):
    path = [p for p in SCENARIOS if p.stem == "two_point_distance"][0]
    proc = subprocess.run(
        [sys.executable, "-m", "algext", "run", str(path), "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "algext", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_expression_whitelist():
    S = CharacterSpace.circle(4)
    assert evaluate_expression("z**2 + 2*i", S)[0] == pytest.approx(1 + 2j)
    for bad in ["z.real", "open('x')", "[1]", "lambda: 1", "1/0"]:
        with pytest.raises(ParseError):
            evaluate_expression(bad, S)
    with pytest.raises(ParseError):
        parse_scenario({"space": {"kind": "circle", "n": 4}, "tasks": [{"op": "nope"}]})
