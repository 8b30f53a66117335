import csv
import os
import subprocess
import sys

import pytest

from warpspec.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC, EXIT_OK, main
from warpspec.config import OUTPUT_ENV, ConfigError, RunConfig

EUCLID = """
[model]
dimension = 3
geometry = euclidean
r0 = 0.01

[energy]
lambda = 1.0
mu = 1.0
R = 1.0
R_max = 200.0
"""

PROFILE = """
[model]
dimension = 3
geometry = profile
r0 = 1.0
b = 1.0
pert = sin_log
delta = 0.2

[energy]
lambda = 1.0
mu = {mu}
R = 50
R_max = 600
"""

BOUNDS = """
[bounds]
b = 1
delta = 0, 0.2, 0.5
"""

SCAN = """
[model]
dimension = 2
geometry = hyperbolic
r0 = 0.01

[potential]
well_depth = 2
well_width = 1

[scan]
lambda_min = 0
lambda_max = 0.25
steps = 20
r_max = 200
"""


def _write(tmp_path, text, out="out", name="run.ini"):
    path = tmp_path / name
    path.write_text(text + f"\n[output]\ndirectory = {tmp_path / out}\n")
    return str(path)


def _verdicts(directory):
    with open(os.path.join(directory, "verdicts.csv"), newline="") as fh:
        return {row[0]: row[1] for row in csv.reader(fh) if row and not row[0].startswith("#")}


def test_analyze_euclidean(tmp_path, capsys):
    assert main(["analyze", _write(tmp_path, EUCLID)]) == EXIT_OK
    v = _verdicts(tmp_path / "out")
    assert v["growth_verdict"] == "true" and v["failing"] == ""
    assert float(v["derivative_mismatch"]) <= 1.0
    assert "growth_verdict=true" in capsys.readouterr().out
    with open(tmp_path / "out" / "trace.csv") as fh:
        assert fh.readline().strip() == "r,M2,N2,F,dF_analytic,dF_fd,G,residual"


def test_infeasible_exit_names_predicate(tmp_path, capsys):
    assert main(["analyze", _write(tmp_path, PROFILE.format(mu=0.15))]) == EXIT_INFEASIBLE
    assert "gcons" in capsys.readouterr().err
    assert "gcons" in _verdicts(tmp_path / "out")["failing"]


def test_malformed_key_is_config_error(tmp_path, capsys):
    assert main(["analyze", _write(tmp_path, EUCLID + "\n[mode]\nell = 2\n")]) == EXIT_CONFIG
    assert "mode.ell" in capsys.readouterr().err
    assert main(["analyze", _write(tmp_path, "[model]\nr0 = abc\n")]) == EXIT_CONFIG
    assert main(["analyze", str(tmp_path / "missing.ini")]) == EXIT_CONFIG


def test_bad_arguments_exit_config(capsys):
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == EXIT_CONFIG


def test_numeric_failure_exit(tmp_path, capsys):
    # a fixed gauge far from the true mean curvature leaves an unbounded remainder
    text = EUCLID.replace("euclidean", "hyperbolic") + "\n[gauge]\nb = 0.3\nc = 0\n"
    assert main(["analyze", _write(tmp_path, text)]) == EXIT_NUMERIC
    assert "numerical failure" in capsys.readouterr().err


def test_determinism(tmp_path):
    a = _write(tmp_path, EUCLID, "a", "a.ini")
    b = _write(tmp_path, EUCLID, "b", "b.ini")
    assert main(["analyze", a]) == main(["analyze", b]) == EXIT_OK
    for name in ("trace.csv", "verdicts.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_env_overrides_output(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["bounds", _write(tmp_path, BOUNDS)]) == EXIT_OK
    assert (tmp_path / "env" / "bounds.csv").exists()
    assert not (tmp_path / "out").exists()


def test_bounds_table(tmp_path, capsys):
    assert main(["bounds", _write(tmp_path, BOUNDS)]) == EXIT_OK
    text = (tmp_path / "out" / "bounds.csv").read_text()
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
    assert rows[0][:10] == ["n", "kappa", "a", "b", "c", "delta", "mu", "E0", "E1", "E2"]
    assert len(rows) == 4 and float(rows[1][7]) == 0.25
    assert "# crossover b=1 delta=0.333333333333333" in text
    assert "crossover" in capsys.readouterr().out


def test_scan_and_report(tmp_path, capsys):
    cfg = _write(tmp_path, SCAN)
    assert main(["scan", cfg]) == EXIT_OK
    assert "scan_summary candidates=1" in capsys.readouterr().out
    assert main(["bounds", _write(tmp_path, BOUNDS, name="b.ini")]) == EXIT_OK
    assert main(["report", str(tmp_path / "out")]) == EXIT_OK
    report = (tmp_path / "out" / "report.md").read_text()
    assert "## bounds" in report and "## scan" in report and "1 decaying" in report


def test_report_needs_outputs(tmp_path):
    assert main(["report", str(tmp_path)]) == EXIT_CONFIG


def test_config_round_trip():
    cfg = RunConfig.parse(PROFILE.format(mu=0.9) + BOUNDS + "\n[gauge]\nb = 1\n")
    again = RunConfig.parse(cfg.to_text())
    assert again == cfg
    assert again.to_text() == cfg.to_text()


def test_config_rejects_unknowns():
    with pytest.raises(ConfigError):
        RunConfig.parse("[nowhere]\nx = 1\n")
    with pytest.raises(ConfigError):
        RunConfig.parse("[energy]\nlam = 1\n")        # the key is spelled 'lambda'
    with pytest.raises(ConfigError):
        RunConfig.parse("[scan]\nlambda_min = 1\nlambda_max = 0\n")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "warpspec", "bounds", _write(tmp_path, BOUNDS)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "crossover" in proc.stdout


def test_short_window_is_config_error(tmp_path, capsys):
    text = PROFILE.format(mu=0.9).replace("R_max = 600", "R_max = 400")
    assert main(["analyze", _write(tmp_path, text)]) == EXIT_CONFIG
    assert "decade" in capsys.readouterr().err


def test_readme_example_config_parses():
    import pathlib
    import re
    text = (pathlib.Path(__file__).resolve().parents[1] / "README.md").read_text()
    cfg = RunConfig.parse(re.search(r"```ini\n(.*?)```", text, re.S).group(1))
    assert cfg.model.pert == "sin_log" and cfg.model.geometry == "profile"
    assert cfg.bounds.delta == [0.0, 0.1, 0.2, 0.3]
