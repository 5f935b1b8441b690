import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from heunpot.cli import RunConfig, main, parse_config, run
from heunpot.errors import UnknownCommand, ValidationError
from heunpot.potentials import PotentialSpec
from heunpot.solutions import ClosedForm, FIG2_V3
from heunpot.triads import Triad

SPEC = {"triad": [2, 1, 0], "a": [-1.0, 0.5, 2.0], "v": [0.3, 0.2, -0.4, 0.1, 0.0],
        "sigma": 1.0}


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(SPEC), encoding="utf-8")
    return str(path)


def call(argv):
    cfg = parse_config(argv)
    out, err = io.StringIO(), io.StringIO()
    code = run(cfg, out, err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_triads_listing():
    code, out, _ = call(["triads"])
    r = rows(out)
    assert code == 0
    assert r[0] == ["triad", "m1", "m2", "m3", "class", "canonical"]
    assert len(r) == 36
    assert len({row[5] for row in r[1:]}) == 11
    assert sum(row[0] == row[5] for row in r[1:]) == 11


def test_catalog_json_templates():
    code, out, _ = call(["catalog", "--format", "json"])
    doc = json.loads(out)
    assert code == 0
    assert len(doc["rows"]) == 11
    for row in doc["rows"]:
        spec = PotentialSpec.from_dict(row["template"])
        assert isinstance(spec.triad, Triad)


def test_fig2_rows_and_values():
    code, out, _ = call(["fig2"])
    r = rows(out)
    assert code == 0
    assert r[0] == ["x", "V_a", "V_b", "V_c", "V_d"]
    assert len(r) == 401
    data = np.array(r[1:], dtype=float)
    for j, v3 in enumerate(FIG2_V3.values(), start=1):
        assert_allclose(data[:, j], ClosedForm(0.0, -1.0, v3).potential_x(data[:, 0]), rtol=1e-15)


def test_output_is_deterministic(spec_file):
    argv = ["solve", spec_file, "--energy", "0.7", "--grid", "0.2:1.0:11"]
    a = call(argv)
    b = call(argv)
    assert a[0] == 0 and a == b
    for line in rows(a[1])[1:]:
        # 17 significant digits round-trip exactly
        assert all(float(v) == float("%.17g" % float(v)) for v in line)


def test_solve_csv_columns(spec_file):
    code, out, _ = call(["solve", "--spec", spec_file, "-E", "0.7", "--grid", "0.2", "1.0", "5"])
    r = rows(out)
    assert code == 0
    assert r[0] == ["x", "z", "psi_re", "psi_im", "residual"]
    assert len(r) == 6
    assert max(float(row[4]) for row in r[1:]) < 1e-6


def test_eval_potential_matches_library(spec_file):
    code, out, _ = call(["eval-potential", spec_file, "--grid", "1.4:2.4:4", "--format", "json"])
    doc = json.loads(out)
    spec = PotentialSpec.from_dict(SPEC)
    from heunpot.potentials import potential_x
    x = np.array([row["x"] for row in doc["rows"]])
    assert_allclose([row["V"] for row in doc["rows"]], potential_x(spec, x), rtol=1e-15)
    code, _, err = call(["eval-potential", spec_file])
    assert code == 1 and "grid" in err


def test_verify_pass_and_corrupted(spec_file, tmp_path):
    code, out, _ = call(["verify", spec_file, "--energy", "0.7"])
    r = rows(out)
    assert code == 0
    assert r[1][-1] in ("true", "True", "1")
    bad = dict(SPEC, v=[1e300, 0.2, -0.4, 0.1, 0.0])
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad), encoding="utf-8")
    code, _, _ = call(["verify", str(path), "--energy", "0.7"])
    assert code == 2


def test_bad_spec_files(tmp_path):
    missing = str(tmp_path / "nope.json")
    assert call(["verify", missing, "--energy", "1"])[0] == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert call(["solve", str(broken)])[0] == 1
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"triad": [2, 2, 2], "a": [0, 1, 1], "v": [0] * 5}),
                     encoding="utf-8")
    assert call(["solve", str(wrong)])[0] == 1


def test_unknown_command(capsys):
    assert main(["frobnicate"]) == 1
    with pytest.raises(UnknownCommand):
        RunConfig("frobnicate")


def test_config_validation():
    with pytest.raises(ValidationError):
        RunConfig("fig2", format="xml")
    with pytest.raises(ValidationError):
        RunConfig("fig2", tol=0.0)
    with pytest.raises(ValidationError):
        RunConfig("solve", grid=(1.0, 0.0, 5))
    with pytest.raises(ValidationError):
        RunConfig("solve", grid=(0.0, 1.0, 1))


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("HEUN_TOL", "1e-12")
    assert parse_config(["fig2"]).tol == 1e-12
    assert parse_config(["fig2", "--tol", "1e-8"]).tol == 1e-8
    monkeypatch.setenv("HEUN_TOL", "tiny")
    assert main(["fig2"]) == 1
    monkeypatch.delenv("HEUN_TOL")
    assert parse_config(["fig2"]).tol == 1e-10


def test_terminate_roots():
    code, out, _ = call(["terminate", "--heun", "2.5", "-1", "0.7", "1.3", "0.4", "-N", "1",
                         "--format", "json"])
    doc = json.loads(out)
    assert code == 0
    assert len(doc["roots"]) == 2
    for root in doc["roots"]:
        c = [complex(*v) for v in root["coeffs"]]
        assert len(c) == 2
    code, out, _ = call(["terminate", "--heun", "2.5", "0", "0.7", "1.3", "0.4"])
    r = rows(out)
    assert code == 0 and len(r) == 2 and float(r[1][1]) == 0.0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "heunpot", "triads"], capture_output=True,
                         text=True, check=False)
    assert res.returncode == 0
    assert len(res.stdout.strip().splitlines()) == 36
