from __future__ import annotations

import csv
import io
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from distode.cli import run

DATA = Path(__file__).parent / "data"
WELL = str(DATA / "well.json")


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_star_identity(capsys):
    code, out, _ = call(capsys, "star", "delta(x)", "H(x)")
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["text"] == "delta(x)"
    assert doc["result"]["deltas"] == [{"point_index": 0, "order": 0, "re": 1.0, "im": 0.0}]
    assert doc["result"]["pieces"] == ["0", "0"]


def test_star_seeded_pair(capsys):
    code, out, _ = call(capsys, "star", "--seed", "7")
    assert code == 0 and set(json.loads(out)) == {"left", "right", "result"}


def test_derivatives(capsys):
    code, out, _ = call(capsys, "dtilde", "H(x)")
    assert code == 0 and json.loads(out)["result"]["text"] == "0"
    code, out, _ = call(capsys, "d", "H(x)")
    assert code == 0 and "delta" in json.loads(out)["result"]["text"]


def test_solve_writes_csv_with_both_sides(capsys, tmp_path):
    out_csv = tmp_path / "psi.csv"
    report = tmp_path / "report.json"
    code, _, _ = call(capsys, "solve", "--problem", WELL, "--csv", str(out_csv), "--out", str(report))
    assert code == 0
    rows = list(csv.reader(io.StringIO(out_csv.read_text())))
    assert rows[0] == ["x", "re", "im"]
    at_zero = [float(r[1]) for r in rows[1:] if float(r[0]) == 0.0]
    assert at_zero == pytest.approx([1.0, 2.0], abs=1e-8)
    doc = json.loads(report.read_text())
    assert doc["dimension"] == 2 and doc["interfaces"][0]["status"] == "unique"
    assert doc["residual"]["delta_max"] <= 1e-9


def test_verify_exit_contract(capsys, tmp_path):
    report = tmp_path / "report.json"
    assert call(capsys, "solve", "--problem", WELL, "--out", str(report))[0] == 0
    code, out, _ = call(capsys, "verify", "--problem", WELL, "--solution", str(report), "--tol", "1e-7")
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = call(capsys, "verify", "--problem", WELL, "--dist", "H(x)")
    doc = json.loads(out)
    assert code == 1 and not doc["passed"] and any("delta" in d for d in doc["details"])


def test_fhat_and_classify(capsys):
    spec = json.dumps({"point": 0, "A": [[2, 0], [0, 3]], "B": [[1, 0], [0, 1]]})
    code, out, _ = call(capsys, "fhat", "H(x)", "--spec", spec)
    doc = json.loads(out)["interfaces"][0]
    assert code == 0 and not doc["in_kernel"]
    assert doc["shift"]["deltas"] == doc["trace"]["deltas"]
    code, out, _ = call(capsys, "classify", "--problem", WELL)
    assert code == 0 and json.loads(out)["interfaces"][0]["tag"] == "interacting"


def test_ode2_star_form(capsys):
    code, out, _ = call(capsys, "ode2", "--problem", WELL, "--form", "star", "--dist", "Hm(x)*cos(x) + H(x)*2*cos(x)")
    doc = json.loads(out)
    assert code == 0 and len(doc["a_tilde"]) == 3
    assert doc["residual"]["text"] == "0"


def test_pair(capsys):
    code, out, _ = call(capsys, "pair", "delta(x)")
    assert code == 0
    assert json.loads(out)["value"]["re"] == pytest.approx(0.36787944117144233, rel=1e-12)


def test_mollifier_check(capsys):
    code, out, _ = call(capsys, "mollifier-check", "--side", "+", "--order", "0", "--eps", "1e-3", "--dist", "H(x)")
    doc = json.loads(out)
    assert code == 0 and doc["rows"][0]["error"] < 1e-3


@pytest.mark.parametrize(
    "argv, message",
    [
        (["solve", "--problem", str(DATA / "bad_rows.json")], "m ≤ n violated"),
        (["solve", "--problem", str(DATA / "bad_lead.json")], "a_n vanishes near x=0"),
        (["d", "H(x)**2"], "syntax error at line 1, column 6"),
        (["solve", "--problem", str(DATA / "missing.json")], "cannot read problem file"),
        (["solve"], "needs --problem"),
    ],
)
def test_input_errors_exit_2(capsys, argv, message):
    code, _, err = call(capsys, *argv)
    assert code == 2 and message in err


def test_console_script():
    exe = shutil.which("distode")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([exe, "star", "delta(x)", "H(x)"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "result" in json.loads(proc.stdout)
