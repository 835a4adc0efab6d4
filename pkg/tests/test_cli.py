import csv
import io
import json
import math

import pytest

from racahcf import cli
from racahcf.crystalfield import cubic_bkq


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_wigner_3jm(capsys):
    code, out, _ = run(capsys, "wigner", "3jm", "--j", "3", "3", "2", "--m", "-2", "2", "0")
    assert code == 0
    assert json.loads(out)["value"] == 0


def test_wigner_exact_half_integers(capsys):
    code, out, _ = run(capsys, "wigner", "cg", "--j", "1/2", "0.5", "0", "--m", "1/2", "-1/2", "0", "--exact")
    data = json.loads(out)
    assert code == 0 and data["text"] == "1/2*sqrt(2)"
    assert data["exact"] == [{"coeff_num": 1, "coeff_den": 2, "rad_num": 2, "rad_den": 1}]


def test_wigner_6j_9j(capsys):
    assert json.loads(run(capsys, "wigner", "6j", "--j", *["1"] * 6)[1])["value"] == pytest.approx(1 / 6)
    code, out, _ = run(capsys, "wigner", "9j", "--j", *["0"] * 9)
    assert code == 0 and json.loads(out)["value"] == 1


def test_mub_report(capsys):
    code, out, _ = run(capsys, "mub", "report", "--d", "5", "--r", "0")
    data = json.loads(out)
    assert code == 0 and len(data["pairs"]) == 15
    for p in data["pairs"]:
        assert round(p["min"], 10) == round(p["max"], 10) == 0.4472135955


def test_mub_basis_and_partition(capsys):
    code, out, _ = run(capsys, "mub", "basis", "--d", "3", "--a", "1")
    assert code == 0 and len(json.loads(out)["vectors"]) == 3
    code, out, _ = run(capsys, "mub", "partition", "--d", "5")
    data = json.loads(out)
    assert data["p"] == 5 and sorted(map(tuple, data["sets"][2])) == [(1, 1), (2, 2), (3, 3), (4, 4)]
    assert run(capsys, "mub", "partition", "--d", "6")[0] == 3


def test_params_convert(capsys):
    code, out, _ = run(capsys, "params", "convert", "--from", "slater", "--to", "racah", "--values", "1000,100,10")
    assert code == 0 and json.loads(out) == {"A": 510, "B": 50, "C": 350}
    code, out, _ = run(capsys, "params", "convert", "--from", "slater_sub", "--to", "racah", "--values", "0,1,0,0",
                       "--exact")
    assert json.loads(out) == {"E^0": "-10", "E^1": "70/9", "E^2": "1/9", "E^3": "5/3"}
    assert run(capsys, "params", "convert", "--from", "nope", "--values", "1,2,3")[0] == 2


def test_params_enumerate(capsys):
    code, out, _ = run(capsys, "params", "enumerate", "--ell", "3", "--group", "O")
    data = json.loads(out)
    assert code == 0 and len(data) == 33 and data[24]["label"] == "(00)0 (66)12, 12a"
    assert run(capsys, "params", "enumerate", "--ell", "4")[0] == 3


def test_reduce_and_symbols(capsys):
    code, out, _ = run(capsys, "reduce", "--group", "O", "--j", "2")
    data = json.loads(out)
    assert code == 0 and data["two_j"] == 4 and len(data["entries"]) == 9
    code, out, _ = run(capsys, "fsym", "--j", "2", "2", "4", "--c1", "0:E:0", "--c2", "0:E:0", "--c", "0:A1:0",
                       "--exact")
    assert json.loads(out)["text"] == "1/30*sqrt(30)"
    code, out, _ = run(capsys, "fbar", "--j", "3", "3", "2", "--c1", "0:A2:0", "--c2", "0:A2:0", "--c3", "0:E:0")
    assert code == 0 and json.loads(out)["value"]["re"] == 0
    assert run(capsys, "fsym", "--j", "2", "2", "4", "--c1", "E", "--c2", "0:E:0", "--c", "0:A1:0")[0] == 2


def test_vsym_csv(capsys):
    code, out, _ = run(capsys, "vsym", "--group", "O", "--phases", "griffith", "--variant", "real")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 207
    assert all(float(r["value_im"]) == 0 for r in rows)


def _param_file(tmp_path):
    data = {"ell": 2, "N": 1, "group": "O", "zeta": 0,
            "bkq": [{"k": k, "q": q, "re": v, "im": 0} for (k, q), v in cubic_bkq(1.0).items()]}
    path = tmp_path / "d1.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_cf_levels_and_sweep(capsys, tmp_path):
    path = _param_file(tmp_path)
    code, out, _ = run(capsys, "cf", "levels", "--params", path)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [(round(float(r["energy"]), 9), int(r["degeneracy"])) for r in rows] == [(-4.0, 6), (6.0, 4)]
    code, out, _ = run(capsys, "cf", "levels", "--params", path, "--sweep", "Dq:0:1000:3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["Dq"]) for r in rows] == [0.0, 500.0, 500.0, 1000.0, 1000.0]
    code, out, _ = run(capsys, "cf", "matrix", "--params", path)
    data = json.loads(out)
    assert code == 0 and sum(len(b["basis"]) for b in data["blocks"]) == 10


def test_cf_bad_file(capsys, tmp_path):
    assert run(capsys, "cf", "levels", "--params", str(tmp_path / "missing.json"))[0] == 2


def test_usage_errors(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "usage" in err
    assert run(capsys)[0] == 2
    assert run(capsys, "wigner", "3jm", "--j", "1", "1")[0] == 2
    assert run(capsys, "wigner", "3jm", "--j", "1/3", "1", "1", "--m", "0", "0", "0")[0] == 2


def test_deterministic(capsys):
    a = run(capsys, "vsym", "--exact")[1]
    b = run(capsys, "vsym", "--exact")[1]
    assert a == b
    assert math.isfinite(len(a))
