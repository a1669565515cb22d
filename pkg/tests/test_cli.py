import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from funcwave.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_profiles(capsys):
    code, out, _ = run(["list-profiles"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    kinds = {r["kind"]: r for r in rows}
    assert kinds["hyperbolic_lens"]["closed_form_abel"] == "yes"
    assert kinds["semi_ellipse"]["closed_form_abel"] == "no"
    code, out, _ = run(["list-profiles", "--format", "json"], capsys)
    assert "fig1.json" in json.loads(out)["configs"]


def test_field_triangle_csv(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    code, _, _ = run(["field", "--config", "fig1.json", "--nx", "400", "--nz", "200",
                      "--out", str(out)], capsys)
    assert code == 0
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert len(data) == 400 * 200
    top = data[data["z"] == 0.0]
    assert len(top) == 400 and np.all(top["psi"] == 0.0)
    below = data["z"] < -0.35 * (1 - np.abs(data["x"]))
    assert np.all(data["inside"][below] == 0) and np.all(data["psi"][below] == 0)
    assert np.all(data["inside"][~below] == 1)


def test_field_json_and_window(capsys):
    code, out, _ = run(["field", "--config", "fig2", "--nx", "5", "--nz", "4",
                        "--window=-0.5,0.5,-0.2,0", "--format", "json"], capsys)
    assert code == 0
    js = json.loads(out)
    assert js["window"] == [-0.5, 0.5, -0.2, 0.0]
    assert len(js["values"]) == 4 and len(js["values"][0]) == 5


def test_solve(capsys):
    code, out, _ = run(["solve", "--config", "dai", "--nx", "3", "--format", "json"], capsys)
    assert code == 0
    js = json.loads(out)
    np.testing.assert_allclose(js["f"], np.cos(np.pi / 2 * np.array(js["x"]) ** 2), atol=1e-12)
    assert js["flux"] == 0.0


def test_verify_default(capsys):
    code, out, _ = run(["verify", "--suite", "default"], capsys)
    assert code == 0
    assert json.loads(out)["all_passed"] is True


def test_verify_failure_exit_code(tmp_path, capsys):
    suite = {"cases": [{"name": "broken", "check": "fet",
                        "profile": {"kind": "isosceles_triangle", "params": {"tau": 0.35}},
                        "solution": {"type": "periodic", "periodic": {"kind": "cosine"}},
                        "perturb": 1e-3}]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(suite))
    code, out, err = run(["verify", "--suite", str(path), "--seed", "4"], capsys)
    assert code == 1
    assert json.loads(out)["all_passed"] is False
    assert "FAIL broken" in err


def test_verify_single_config(capsys):
    code, out, _ = run(["verify", "--config", "barcilon_tri"], capsys)
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["field"],
    ["field", "--config", "no_such_config"],
    ["field", "--config", "fig1", "--window", "1,2"],
    ["field", "--config", "fig1", "--format", "xml"],
    ["verify", "--suite", "default", "--config", "fig1"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert out == "" and err


def test_bad_json_config(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(["field", "--config", str(p)], capsys)
    assert code == 2 and "invalid JSON" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "funcwave", "list-profiles"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("kind,params")
