import json
import subprocess
import sys
from fractions import Fraction

import pytest
import sympy as sp

from deficiency.cli import SCHEMA, UsageError, dumps, fmt, main, parse_number, parse_pair


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


# ---------------------------------------------------------------- parsing


@pytest.mark.parametrize("text,value", [
    ("3", 3), ("-2", -2), ("5/2", Fraction(5, 2)), ("0.99", 0.99), ("1e-3", 1e-3),
    ("sqrt(33)/2", sp.sqrt(33) / 2), ("sqrt(2)", sp.sqrt(2)),
])
def test_parse_number(text, value):
    got = parse_number(text)
    assert got == value and type(got) is type(value)


@pytest.mark.parametrize("text", ["", "abc", "sqrt(x)/2", "1/0", "2**3", "__import__('os')"])
def test_parse_number_rejects(text):
    with pytest.raises(UsageError):
        parse_number(text)


def test_parse_pair():
    assert str(parse_pair("1,inf")) == "(1, inf)"
    with pytest.raises(UsageError):
        parse_pair("1,2,3")


def test_float_formatting():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert fmt(0.1234567891) == "0.123457"


# ---------------------------------------------------------------- indices


@pytest.mark.parametrize("argv,expected", [
    (["--pair", "1,1", "--power", "2"], [2, 2]),
    (["--pair", "0,0", "--poly", "3,5,1"], [0, 0]),
    (["--pair", "1,0", "--power", "3"], [2, 1]),
    (["--pair", "2,2", "--product", "1"], [3, 3]),
    (["--pair", "1,inf", "--power", "2"], ["inf", "inf"]),
    (["--pair", "1,inf", "--power", "3"], ["inf", "inf"]),
])
def test_indices(capsys, argv, expected):
    code, rep = run_json(capsys, "indices", *argv)
    assert code == 0
    assert rep["schema"] == SCHEMA and rep["command"] == "indices"
    assert rep["results"]["indices"] == expected


def test_indices_table(capsys):
    code, out, _ = run(capsys, "indices", "--pair", "1,0", "--power", "3")
    assert code == 0 and "(2, 1)" in out


@pytest.mark.parametrize("argv", [
    ["indices", "--pair", "1", "--power", "2"],
    ["indices", "--pair", "1,1"],
    ["indices", "--pair", "1,1", "--power", "2", "--poly", "1,1"],
    ["indices", "--pair", "a,b", "--power", "2"],
    ["nonexistent"],
    ["classify", "--expr", "bessel_gamma", "--gamma", "x+1"],
    ["verify", "--tol", "limit3=abc"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


# ---------------------------------------------------------------- verify


def test_verify_limit3(capsys):
    code, rep = run_json(capsys, "verify", "--filter", "limit3")
    assert code == 0
    claims = [c["claim"] for c in rep["checks"]]
    assert len(claims) == 12 and claims == sorted(claims)
    assert all(c["pass"] for c in rep["checks"])
    assert "limit3/alpha=sqrt(33)/2/power4" in claims


def test_verify_jacobi_table(capsys):
    code, rep = run_json(capsys, "verify", "--filter", "jacobi-table")
    cases = [c for c in rep["checks"] if not c["claim"].endswith("ci-width")]
    assert code == 0 and len(cases) == 9


def test_verify_none_matching(capsys):
    code, out, _ = run(capsys, "verify", "--filter", "none-matching")
    assert code == 0
    assert "0 checks" in out


def test_verify_tolerance_override_fails_honestly(capsys):
    # an impossible tolerance turns the residual checks into failures and exit 1
    code, rep = run_json(capsys, "verify", "--filter", "compose-square/alpha=2/", "--tol",
                         "compose-square=0")
    failed = [c["claim"] for c in rep["checks"] if not c["pass"]]
    assert code == 1 and rep["exit_status"] == 1
    assert any(f.endswith("/p2") or f.endswith("/p1") for f in failed)


def test_verify_deterministic_json(capsys):
    argv = ["verify", "--filter", "stirling", "--json"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first


# ---------------------------------------------------------------- thin commands


def test_roots(capsys):
    code, rep = run_json(capsys, "roots", "--coeffs", "0,-1,0,1", "--eps", "1e-3")
    assert code == 0
    # x³ - x - iε, odd degree with positive leading coefficient: (2, 1)
    assert rep["results"]["counts"] == {"upper": 2, "lower": 1, "axis": 0}
    assert rep["results"]["lemma_prediction"] == [2, 1]


def test_stirling(capsys):
    code, rep = run_json(capsys, "stirling", "--family", "legendre", "--m", "3", "--j", "2")
    assert code == 0 and rep["results"]["entries"][0]["decimal"] == 8


def test_expand(capsys):
    code, out, _ = run(capsys, "expand", "--family", "legendre", "--m", "2")
    assert code == 0 and out.strip()


def test_classify(capsys):
    code, rep = run_json(capsys, "classify", "--expr", "bessel_gamma", "--gamma", "1/2")
    assert code == 0
    assert rep["results"]["deficiency_indices"] == [1, 1]


def test_classify_bad_parameter_exits_1(capsys):
    code, _, err = run(capsys, "classify", "--expr", "laguerre", "--alpha", "-2")
    assert code == 1 and "classify" in err


def test_pde(capsys, tmp_path):
    code, rep = run_json(capsys, "pde", "--dim", "3", "--L", "2", "--m", "3",
                         "--report-dir", str(tmp_path))
    assert code == 0
    assert rep["results"]["total"] == [3, 3]
    assert rep["results"]["powers"]["3"] == [9, 9]
    saved = json.loads((tmp_path / "pde.json").read_text())
    assert saved == rep


def test_report_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DEFICIENCY_REPORT_DIR", str(tmp_path))
    assert main(["indices", "--pair", "1,1", "--power", "2"]) == 0
    assert json.loads((tmp_path / "indices.json").read_text())["results"]["indices"] == [2, 2]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "deficiency", "indices", "--pair", "1,1",
                          "--power", "2", "--json"], capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["results"]["indices"] == [2, 2]
