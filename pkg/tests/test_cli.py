import csv
import json
import subprocess
import sys

import pytest

from gaussact.cli import main, run
from gaussact.suites import SUITES, ConfigError, resolve_params


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def test_moments_ok(tmp_path):
    cfg = write(tmp_path, {"suite": "moments", "seed": 0, "params": {"d": 2}})
    assert run("moments", cfg, str(tmp_path / "out")) == 0
    rep = json.loads((tmp_path / "out" / "moments.json").read_text())
    assert rep["passed"] and rep["suite"] == "moments"
    assert rep["config"]["params"]["d"] == 2
    assert all(set(c) == {"name", "pass", "residual", "tolerance"} for c in rep["checks"])


def test_csv_columns(tmp_path):
    cfg = write(tmp_path, {"suite": "ps-trace", "seed": 0})
    assert run("ps-trace", cfg, str(tmp_path)) == 0
    with open(tmp_path / "ps-trace__ps_trace.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["param", "measured_re", "measured_im", "predicted_re", "predicted_im", "abs_residual"]
    assert [float(r["param"]) for r in rows] == [0.5, 1.0, 2.0]


def test_failed_check_exit_1(tmp_path):
    cfg = write(tmp_path, {"suite": "ps-trace", "params": {"tol": 1e-30}})
    assert run("ps-trace", cfg, str(tmp_path)) == 1
    rep = json.loads((tmp_path / "ps-trace.json").read_text())
    assert not rep["passed"]


@pytest.mark.parametrize("doc", [
    "",
    "   \n",
    "{}",
    "[1, 2]",
    "{not json",
    {"suite": "moments", "bogus": 1},
    {"suite": "ps-trace"},
    {"suite": "moments", "seed": "zero"},
    {"suite": "moments", "params": {"d": "two"}},
    {"suite": "moments", "params": {"unknown": 1}},
    {"suite": "moments", "params": {"D": 2}},
    {"suite": "moments", "suites": {}},
])
def test_bad_config_exit_2(tmp_path, doc):
    assert run("moments", write(tmp_path, doc), str(tmp_path)) == 2


def test_missing_config_and_unknown_suite(tmp_path):
    assert run("moments", str(tmp_path / "nope.json"), str(tmp_path)) == 2
    assert run("nope", write(tmp_path, {"suite": "nope"}), str(tmp_path)) == 2


def test_all_config_validation(tmp_path):
    assert run("all", write(tmp_path, {"suite": "all", "params": {}}), str(tmp_path)) == 2
    assert run("all", write(tmp_path, {"suite": "all", "suites": {"nope": {}}}), str(tmp_path)) == 2


def test_resource_cap_exit_3(tmp_path):
    cfg = write(tmp_path, {"suite": "moments", "params": {"d": 16, "D": 12}})
    assert run("moments", cfg, str(tmp_path)) == 3


def test_byte_stable_and_seed_override(tmp_path):
    cfg = write(tmp_path, {"suite": "semigroup", "seed": 3})
    run("semigroup", cfg, str(tmp_path / "a"))
    run("semigroup", cfg, str(tmp_path / "b"))
    a = (tmp_path / "a" / "semigroup.json").read_bytes()
    assert a == (tmp_path / "b" / "semigroup.json").read_bytes()
    run("semigroup", cfg, str(tmp_path / "c"), seed=4)
    rep = json.loads((tmp_path / "c" / "semigroup.json").read_text())
    assert rep["config"]["seed"] == 4


def test_parallel_matches_serial(tmp_path):
    cfg = write(tmp_path, {"suite": "smooth-identity", "seed": 1, "params": {"count": 3}})
    assert run("smooth-identity", cfg, str(tmp_path / "s")) == 0
    assert run("smooth-identity", cfg, str(tmp_path / "p"), parallel=True) == 0
    s = (tmp_path / "s" / "smooth-identity.json").read_bytes()
    assert s == (tmp_path / "p" / "smooth-identity.json").read_bytes()


def test_cohomology_rep_file(tmp_path):
    rep = {"generators": 1, "relators": [[1, 1, 1, 1]], "matrices": [[[0.0, -1.0], [1.0, 0.0]]]}
    rep_path = write(tmp_path, rep, "rep.json")
    cfg = write(tmp_path, {"suite": "cohomology", "params": {"rep_file": rep_path}})
    assert run("cohomology", cfg, str(tmp_path)) == 0
    cfg = write(tmp_path, {"suite": "cohomology", "params": {"cocycle_file": rep_path}})
    assert run("cohomology", cfg, str(tmp_path)) == 2


def test_resolve_params():
    p = resolve_params("moments", {"tol": 1})
    assert p["tol"] == 1.0 and isinstance(p["tol"], float)
    with pytest.raises(ConfigError):
        resolve_params("moments", {"d": True})
    assert set(SUITES) == {"moments", "cohomology", "ps-trace", "deformation-decay", "semigroup",
                           "smooth-identity", "malleable-torus", "bimodule", "invariant-unitary"}


def test_main_and_entry_point(tmp_path):
    cfg = write(tmp_path, {"suite": "ps-trace"})
    assert main(["run", "ps-trace", "--config", cfg, "--out", str(tmp_path)]) == 0
    with pytest.raises(SystemExit):
        main(["run", "ps-trace"])
    out = subprocess.run([sys.executable, "-m", "gaussact.cli", "run", "ps-trace", "--config", cfg,
                          "--out", str(tmp_path / "m")], capture_output=True, text=True)
    assert out.returncode == 0
    assert "ps-trace: PASS" in out.stdout
