import csv
import io
import json
import subprocess
import sys

import pytest

from qextract import pipeline as pl
from qextract.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_extract_to_stdout(capsys):
    code, out, _ = run(capsys, "extract", "--function", "constant", "--qubits", "10")
    assert code == 0
    rep = json.loads(out)
    assert rep["metrics"]["psi"]["sup"] <= 1e-6
    assert rep["config"]["n"] == 10


def test_extract_to_file_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["--function", "cosine-bump", "--qubits", "10", "--cheb-m", "8", "--mode", "noisy", "--eps-psi", "0.01", "--seed", "42"]
    assert run(capsys, "extract", *args, "--out", str(a))[0] == 0
    assert run(capsys, "extract", *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_expression_and_file_functions(tmp_path, capsys):
    code, out, _ = run(capsys, "extract", "--function", "expr:sqrt((1+0.5*cos(pi*x))/2)", "--qubits", "10", "--cheb-m", "10")
    assert code == 0 and json.loads(out)["function"]["provenance"] == "parsed-expression"
    p = tmp_path / "f.txt"
    p.write_text("lambda = 1.0\nexpr = exp(-x^2)\n")
    code, out, _ = run(capsys, "extract", "--function", f"file:{p}", "--qubits", "10", "--a-psi", "0.5")
    assert code == 0 and json.loads(out)["function"]["lambda"] == 1.0


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--axis", "n", "--values", "8,9,10", "--cheb-m", "6", "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert list(rows[0]) == pl.SWEEP_HEADER
    assert [r["value"] for r in rows] == ["8", "9", "10"]


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", "--function", "constant", "--qubits", "8", "--eps-total", "0.1")
    d = json.loads(out)
    assert code == 0
    assert d["predicted_cost"] == pytest.approx(0.5 * 64 / 0.1, rel=1e-6)


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0 and "FAIL" not in out
    code, out, _ = run(capsys, "verify", "--tamper-basis-scale", "1.01")
    assert code == 3 and "FAIL" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["extract", "--mode", "phase"],
        ["extract", "--qubits", "two"],
        ["extract", "--qubits", "2"],
        ["extract", "--seed", "-3"],
        ["sweep", "--axis", "n"],
        ["sweep", "--axis", "n", "--values", "8,x"],
        ["extract", "--a-psi", "2"],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 1


def test_numeric_failure_exit_2(capsys):
    code, _, err = run(capsys, "extract", "--qubits", "4", "--cheb-m", "16")
    assert code == 2
    assert "[nodes]" in err


@pytest.mark.parametrize("spec, code", [("nope", 1), ("expr:x +", 1), ("file:/no/such/file", 1), ("expr:x", 2)])
def test_function_spec_failures(capsys, spec, code):
    got, _, err = run(capsys, "extract", "--function", spec)
    assert got == code and "[function]" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qextract", "predict", "--function", "constant"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["M"] >= 2
