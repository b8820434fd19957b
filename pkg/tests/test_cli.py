from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from kreinlab.cli import main, parse_complex
from kreinlab.errors import InputError

from conftest import FIXTURES


def run(*args, env=None):
    full_env = dict(os.environ, **(env or {}))
    return subprocess.run([sys.executable, "-m", "kreinlab.cli", *args], capture_output=True, text=True,
                          env=full_env)


def call(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def fx(name):
    return str(FIXTURES / name)


@pytest.mark.parametrize("text,value", [
    ("0+0i", 0), ("1-2.5i", 1 - 2.5j), (" 3 + 4 i ", 3 + 4j), ("2i", 2j), ("-1e-3+4e2i", -1e-3 + 400j), ("7", 7),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "1+2", "i i", "nan", "inf+1i", "1+2ii", "abc"])
def test_parse_complex_rejects(text):
    with pytest.raises(InputError):
        parse_complex(text)


def test_triplet_eval_m_at_zero_is_lambda(capsys):
    code, out, _ = call(capsys, "triplet", "eval", "--input", fx("scalar_triplet.json"), "--z", "0+0i", "--what", "m")
    assert code == 0
    assert json.loads(out)["value"] == [[[0.0, 0.0]]]


def test_triplet_eval_scalar_m_at_one(capsys):
    code, out, _ = call(capsys, "triplet", "eval", "--input", fx("scalar_triplet.json"), "--z", "1+0i", "--what", "m")
    rep = json.loads(out)
    assert code == 0 and rep["value"] == [[[2.0, 0.0]]]
    assert rep["version"] and rep["tool"] == "kreinlab"


def test_triplet_eval_q_with_zero_beta1(capsys):
    code, out, _ = call(capsys, "triplet", "eval", "--input", fx("scalar_triplet.json"),
                        "--pair", fx("scalar_pair_beta1_zero.json"), "--z", "0.5+1i", "--what", "q")
    assert code == 0 and json.loads(out)["value"] == [[[0.0, 0.0]]]  # -0.0 == 0.0


def test_triplet_eval_other_quantities(capsys):
    base = ["triplet", "eval", "--input", fx("scalar_triplet.json"), "--pair", fx("scalar_pair.json"), "--z", "1"]
    code, out, _ = call(capsys, *base, "--what", "q")
    assert json.loads(out)["value"][0][0][0] == pytest.approx(-1 / 3)
    code, out, _ = call(capsys, *base, "--what", "secular")
    v = json.loads(out)["value"]
    assert v["log_modulus"] == pytest.approx(1.0986122886681098) and v["phase"] == pytest.approx([1, 0])
    code, out, _ = call(capsys, *base, "--what", "resolvent")
    assert json.loads(out)["value"][0][0][0] == pytest.approx(1.0)
    for what in ("krein", "theta"):
        code, out, _ = call(capsys, *base, "--what", what)
        assert code == 0 and len(json.loads(out)["value"]) == 1


def test_triplet_eval_errors(capsys):
    args = ["triplet", "eval", "--input", fx("scalar_triplet.json"), "--z", "0.1i"]
    assert call(capsys, *args, "--what", "q")[0] == 1  # pair required
    assert call(capsys, "triplet", "eval", "--input", fx("bad.json"), "--z", "0", "--what", "m")[0] == 1
    assert call(capsys, "triplet", "eval", "--input", fx("missing.json"), "--z", "0", "--what", "m")[0] == 1
    assert call(capsys, "triplet", "eval", "--input", fx("scalar_triplet.json"), "--z", "2", "--what", "m")[0] == 2
    assert call(capsys, "triplet", "eval", "--input", fx("scalar_triplet.json"), "--z", "x", "--what", "m")[0] == 1
    assert call(capsys, "triplet", "eval", "--input", fx("one_center.json"), "--z", "0", "--what", "m")[0] == 1
    code, out, err = call(capsys, "triplet", "eval", "--input", fx("scalar_triplet.json"),
                          "--pair", fx("scalar_pair.json"), "--z", "-2", "--what", "q")
    assert code == 2 and out == "" and "SingularBoundaryOperator" in err


def test_usage_errors_are_input_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--bogus"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_verify_small_run_and_failures(capsys):
    code, out, err = call(capsys, "verify", "--seed", "3", "--instances", "4")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["seed"] == 3 and "elapsed" not in rep
    assert set(rep["tolerances"]) == set(rep["worst_residuals"])
    assert "verify:" in err
    assert call(capsys, "verify", "--instances", "0")[0] == 1
    assert call(capsys, "verify", "--n-min", "5", "--n-max", "70")[0] == 1
    assert call(capsys, "verify", "--tol", "-1")[0] == 1
    code, out, _ = call(capsys, "verify", "--instances", "2", "--tol", "1e-30")
    assert code == 3 and json.loads(out)["pass"] is False
    code, out, _ = call(capsys, "verify", "--instances", "1", "--timing")
    assert "elapsed" in json.loads(out)


def test_verify_thread_count_does_not_change_report(capsys, monkeypatch):
    monkeypatch.setenv("KREINLAB_THREADS", "1")
    _, one, _ = call(capsys, "verify", "--seed", "5", "--instances", "6")
    monkeypatch.setenv("KREINLAB_THREADS", "3")
    _, three, _ = call(capsys, "verify", "--seed", "5", "--instances", "6")
    assert one == three
    monkeypatch.setenv("KREINLAB_THREADS", "many")
    assert call(capsys, "verify", "--instances", "1")[0] == 1


def test_pointint_spectrum_commands(capsys):
    code, out, _ = call(capsys, "pointint", "spectrum", "--model", fx("one_center.json"), "--zmin", "-10", "--zmax", "0.9")
    (state,) = json.loads(out)["bound_states"]
    assert code == 0 and abs(state["z"]) < 1e-10 and abs(state["energy"] + 1) < 1e-10
    code, out, _ = call(capsys, "pointint", "spectrum", "--model", fx("free_model.json"), "--zmin", "-10", "--zmax", "0.9")
    assert code == 0 and json.loads(out)["bound_states"] == []
    code, out, _ = call(capsys, "pointint", "spectrum", "--model", fx("two_centers.json"), "--zmin", "-10", "--zmax", "0.9")
    assert code == 0 and json.loads(out)["tolerances"]["kernel_rel_tol"] == 1e-8
    assert call(capsys, "pointint", "spectrum", "--model", fx("coincident.json"), "--zmin", "-1", "--zmax", "0.5")[0] == 1
    assert call(capsys, "pointint", "spectrum", "--model", fx("one_center.json"), "--zmin", "-1", "--zmax", "1")[0] == 1


def test_pointint_kernel_command(capsys, tmp_path):
    out_file = tmp_path / "k.csv"
    code, out, _ = call(capsys, "pointint", "kernel", "--model", fx("one_center.json"), "--z", "-1",
                        "--grid", fx("grid.json"), "--out", str(out_file))
    lines = out_file.read_text().splitlines()
    assert code == 0 and out == ""
    assert lines[0] == "x1,x2,x3,re,im,excluded" and len(lines) == 4
    assert lines[2].endswith(",1")
    code, out, _ = call(capsys, "pointint", "kernel", "--model", fx("one_center.json"), "--z", "3",
                        "--grid", fx("grid.json"))
    assert code == 2
    assert call(capsys, "pointint", "kernel", "--model", fx("one_center.json"), "--z", "-1",
                "--grid", fx("scalar_pair.json"))[0] == 1


def test_console_entry_point_runs():
    res = run("--version")
    assert res.returncode == 0 and "kreinlab" in res.stdout
