import csv
import io
import json
import os

import pytest

from pwmelnikov.cli import main

DATA = os.path.join(os.path.dirname(__file__), "data")
FOUR_U = os.path.join(DATA, "four_u.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bounds_table(capsys):
    code, out, _ = run(capsys, "bounds", "--m-max", "3", "--n-max", "4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["m", "n", "region", "lower", "upper"]
    assert ["3", "2", "D2∪D3", "5", "6"] in rows
    assert ["2", "1", "D4", "3", "3"] in rows


def test_bounds_findings_exit_code(capsys):
    code, _, err = run(capsys, "bounds", "--m-max", "2", "--n-max", "0", "--n-min", "0")
    assert code == 2 and "FINDING" in err


def test_assemble_four_u(capsys):
    code, out, _ = run(capsys, "assemble", FOUR_U)
    assert code == 0
    assert json.loads(out)["mono"] == [[1, "4"]]


def test_count_four_u(capsys):
    code, out, _ = run(capsys, "count", FOUR_U)
    assert code == 0 and json.loads(out)["count"] == 0


def test_reduce_output(capsys):
    code, out, _ = run(capsys, "reduce", "--m", "3", "--i", "0", "--j", "2")
    assert code == 0
    assert json.loads(out)["integrals"][0]["text"] == "2/3*u^7 + 2/3*h^1*J00"


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--grid", "quick")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows and max(float(r["max_rel_error"]) for r in rows) < 1e-8


def test_verify_tolerance_override_surfaces_findings(capsys):
    code, _, err = run(capsys, "verify", "--grid", "quick", "--tol", "oracle_rel=1e-30")
    assert code == 2 and "FINDING" in err


def test_construct_and_simulate(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "--m", "2", "--n", "1", "--targets", "0.6,1.0,1.5")
    assert code == 0
    obj = json.loads(out)
    assert obj["zeros"]["count"] == 3
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(obj["spec"]))
    code, out, _ = run(capsys, "simulate", str(spec), "--epsilon", "1e-3", "--samples", "40")
    assert code == 0
    assert len(json.loads(out)["cycles"]) == 3
    code, out, _ = run(capsys, "simulate", str(spec), "--epsilon", "1e-3", "--samples", "10", "--plot-data")
    assert out.splitlines()[0] == "u,delta" and len(out.splitlines()) == 11
    code, out, _ = run(capsys, "simulate", str(spec), "--epsilon", "1e-3", "--u0", "1.0", "--max-time", "0.2")
    assert out.splitlines()[0] == "t,x,y,zone"


def test_determinism(capsys):
    a = run(capsys, "count", "--random", "3,3", "--seed", "11")
    b = run(capsys, "count", "--random", "3,3", "--seed", "11")
    c = run(capsys, "count", "--random", "3,3", "--seed", "12")
    assert a == b and a[1] != c[1]
    d = run(capsys, "construct", "--m", "3", "--n", "2")
    e = run(capsys, "construct", "--m", "3", "--n", "2")
    assert d == e


def test_output_file(capsys, tmp_path):
    dest = tmp_path / "out.json"
    code, out, _ = run(capsys, "assemble", FOUR_U, "-o", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["mono"] == [[1, "4"]]


def test_domain_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"m": 3,\n "n": }')
    code, _, err = run(capsys, "assemble", str(bad))
    assert code == 1 and "line 2" in err
    code, _, err = run(capsys, "simulate", FOUR_U, "--epsilon", "0.5")
    assert code == 1
    code, _, _ = run(capsys, "construct", "--m", "3", "--n", "0", "--targets", "1,2,3")
    assert code == 1


def test_bad_tolerance_key():
    with pytest.raises(SystemExit):
        main(["verify", "--tol", "nonsense=1"])
