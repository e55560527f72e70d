import csv
import json
import math
import re
import subprocess
import sys

import pytest

from solitonlab.cli import main
from solitonlab.report import RunConfig, ConfigError, fmt_float, to_json


def run(args, tmp_path):
    return main(list(args) + ["--out", str(tmp_path)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def strip_timestamp(text):
    return re.sub(r'"timestamp": "[^"]*"', '"timestamp": ""', text)


def test_solve_cigar_rows(tmp_path):
    assert run(["solve", "--n", "1", "--s-min", "-10", "--s-max", "10", "--grid", "5"], tmp_path) == 0
    rows = read_csv(tmp_path / "solve.csv")
    assert rows[0] == ["s", "phi", "phi1", "phi2", "phi3", "residual"]
    assert len(rows) == 6
    for row in rows[1:]:
        s, phi = float(row[0]), float(row[1])
        assert phi == pytest.approx(math.log1p(math.exp(s)), abs=1e-12)


def test_solve_two_rows(tmp_path):
    assert run(["solve", "--grid", "2", "--format", "csv"], tmp_path) == 0
    assert len(read_csv(tmp_path / "solve.csv")) == 3
    assert not (tmp_path / "solve.json").exists()


def test_invalid_n_writes_nothing(tmp_path):
    out = tmp_path / "o"
    assert main(["solve", "--n", "13", "--out", str(out)]) == 2
    assert not out.exists()


def test_bad_grid_and_range(tmp_path):
    assert run(["solve", "--grid", "1"], tmp_path) == 2
    assert run(["solve", "--s-min", "5", "--s-max", "1"], tmp_path) == 2


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--format", "xml"])
    assert exc.value.code == 2


def test_unknown_tolerance_rejected(tmp_path):
    assert run(["verify", "--tol", "not_a_key=1"], tmp_path) == 2
    assert run(["verify", "--tol", "R_rho"], tmp_path) == 2


def test_curvature_columns_and_cigar_blanks(tmp_path):
    assert run(["curvature", "--n", "1", "--grid", "4", "--format", "csv"], tmp_path) == 0
    rows = read_csv(tmp_path / "curvature.csv")
    assert rows[0] == ["s", "R", "ric_rad", "ric_fib", "A", "B", "C", "D", "sec_min", "bisec_min",
                       "rho", "R_rho", "R_s"]
    for row in rows[1:]:
        assert row[5] == row[6] == row[7] == ""


def test_curvature_R_column_is_n_minus_phi1(tmp_path):
    assert run(["curvature", "--n", "2", "--grid", "6", "--format", "csv"], tmp_path / "c") == 0
    assert run(["solve", "--n", "2", "--grid", "6", "--format", "csv"], tmp_path / "s") == 0
    curv = read_csv(tmp_path / "c" / "curvature.csv")[1:]
    sol = read_csv(tmp_path / "s" / "solve.csv")[1:]
    for c, s in zip(curv, sol):
        assert float(c[1]) == 2 - float(s[2])


def test_curvature_far_row_decay(tmp_path):
    assert run(["curvature", "--n", "2", "--s-min", "100", "--s-max", "10000", "--grid", "2",
                "--format", "csv"], tmp_path) == 0
    last = read_csv(tmp_path / "curvature.csv")[-1]
    assert float(last[11]) == pytest.approx(math.sqrt(2) / 2, rel=0.02)


def test_numbers_use_fixed_scientific_format(tmp_path):
    assert run(["solve", "--grid", "3", "--format", "csv"], tmp_path) == 0
    for row in read_csv(tmp_path / "solve.csv")[1:]:
        for cell in row:
            assert re.fullmatch(r"-?\d\.\d{16}e[+-]\d{2,3}", cell)


def test_flow_and_asym_and_collapse_commands(tmp_path):
    assert run(["flow", "--grid", "5"], tmp_path) == 0
    assert (tmp_path / "flow.csv").exists() and (tmp_path / "flow.json").exists()
    assert run(["asym"], tmp_path) == 0
    assert run(["collapse", "--n", "3", "--k-max", "20"], tmp_path) == 0
    rows = read_csv(tmp_path / "collapse.csv")
    assert len(rows) == 1 + 18


def test_collapse_rejects_cigar(tmp_path):
    assert run(["collapse", "--n", "1"], tmp_path) == 2


def test_verify_default_passes_and_is_deterministic(tmp_path):
    assert run(["verify", "--format", "json"], tmp_path / "a") == 0
    assert run(["verify", "--format", "json"], tmp_path / "b") == 0
    a = (tmp_path / "a" / "verify.json").read_text()
    b = (tmp_path / "b" / "verify.json").read_text()
    assert strip_timestamp(a) == strip_timestamp(b)
    report = json.loads(a)
    assert report["pass"] is True
    for claims in report["modules"].values():
        for c in claims:
            assert {"claim_id", "anchor", "computed", "target", "tolerance", "mode", "pass"} <= set(c)
            assert c["mode"] in ("two_sided", "upper", "lower", "limit")


def test_verify_override_forces_failure(tmp_path):
    assert run(["verify", "--format", "json", "--tol", "R_rho=1e-6"], tmp_path) == 1
    report = json.loads((tmp_path / "verify.json").read_text())
    failed = [c["claim_id"] for m in report["modules"].values() for c in m if c["pass"] is False]
    assert "decay.R_rho.s=1e3" in failed
    assert all(c.startswith("decay.R_rho") for c in failed)


def test_verify_cigar_skips_collapse(tmp_path):
    assert run(["verify", "--n", "1", "--format", "json"], tmp_path) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    collapse = [c for c in report["modules"]["asymptotics_probe"] if c["claim_id"].startswith("collapse.")]
    assert collapse and all(c["status"] == "skip" and c["pass"] is None for c in collapse)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 3\ngrid = 4\nformat = csv\ntol.R_rho = 0.5\n")
    assert main(["solve", "--config", str(cfg), "--grid", "7", "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "solve.csv")
    assert len(rows) == 8
    assert not (tmp_path / "o" / "solve.json").exists()


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SOLITONLAB_OUT", str(tmp_path / "env"))
    assert main(["solve", "--grid", "2", "--format", "csv"]) == 0
    assert (tmp_path / "env" / "solve.csv").exists()


def test_overwrites_instead_of_appending(tmp_path):
    run(["solve", "--grid", "3", "--format", "csv"], tmp_path)
    run(["solve", "--grid", "3", "--format", "csv"], tmp_path)
    assert len(read_csv(tmp_path / "solve.csv")) == 4


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "solitonlab", "solve", "--grid", "2", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "solve.csv").exists()


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(n=0)
    with pytest.raises(ConfigError):
        RunConfig(tolerance_overrides={"zzz": 1.0})
    assert RunConfig().samples().size == 200


def test_json_writer():
    assert to_json({"a": 1.5, "b": [None, True, float("nan")]}) == (
        '{\n  "a": 1.5000000000000000e+00,\n  "b": [\n    null,\n    true,\n    null\n  ]\n}'
    )
    assert fmt_float(None) == ""
