import json
import os
import subprocess
import sys

import pytest

from simplex_spectra import _parallel, cli


@pytest.fixture(autouse=True)
def _restore_threads(monkeypatch):
    monkeypatch.setenv(_parallel.THREADS_ENV, "2")


def run(tmp_path, name, argv, capsys):
    out = tmp_path / name
    code = cli.main(argv + ["--output-dir", str(out)])
    text = capsys.readouterr()
    files = {p.name: p.read_bytes() for p in sorted(out.iterdir())} if out.exists() else {}
    return code, text.out, text.err, files


def test_gap_assert_closed_form(tmp_path, capsys):
    code, out, _, files = run(tmp_path, "g", ["gap", "--alpha", "1,1,1", "--assert-paper"], capsys)
    assert code == 0
    assert "model=dirichlet gap=1.000000 expected=1.000000" in out
    assert "model=fv gap=3.000000 expected=3.000000" in out
    assert set(files) == {"gap.csv", "gap.json", "manifest.json"}
    manifest = json.loads(files["manifest.json"])
    assert manifest["command"] == "gap" and "threads" not in manifest["config"]


def test_gap_single_model_flag(capsys):
    assert cli.main(["gap", "--alpha", "1,1,1", "--n", "2", "--model", "dirichlet", "--degree", "3",
                     "--assert-paper"]) == 0
    assert "gap=1.000000" in capsys.readouterr().out
    assert cli.main(["gap", "--alpha", "1,1,1", "--model", "fv"]) == 0
    assert "gap=3.000000" in capsys.readouterr().out
    assert cli.main(["gap", "--alpha", "1,1,x"]) == 2


def test_gap_mismatch_exit_4(capsys, monkeypatch):
    monkeypatch.setattr(cli, "GAP_TOL", -1.0)
    assert cli.main(["gap", "--alpha", "1,1,1", "--model", "fv", "--assert-paper"]) == 4
    assert "check failed" in capsys.readouterr().err


def test_localize_bad_gamma_exit_2():
    assert cli.main(["localize", "--alpha", "1,1,1", "--gamma", "1.5"]) == 2
    assert cli.main(["localize", "--alpha", "1,1,1", "--gamma", "0.5"]) == 2


def test_sharpness_report(tmp_path, capsys):
    code, out, _, files = run(tmp_path, "s", ["sharpness", "--alpha", "0.5,0.5,1", "--families", "bump",
                                              "--samples", "200000"], capsys)
    assert code == 0
    rep = json.loads(files["sharpness.json"])[0]
    assert rep["sharp_flag"] is True and rep["p_tilde"] == 2.0
    assert abs(rep["forced_measured"]["dirichlet"] - 2.0) < 0.3
    assert "bump_m2.csv" in files and "bump_beta_fv.csv" in files


def test_gap_gem(tmp_path, capsys):
    code, out, _, _ = run(tmp_path, "g", ["gap", "--alpha", "1,1,1", "--models", "gem", "--degree", "1",
                                          "--samples", "100000", "--assert-paper"], capsys)
    assert code == 0 and "model=gem" in out


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.main(["gap", "--alpha", "1,-1,1"]) == 2
    assert cli.main(["gap", "--alpha", "1,1,1", "--n", "3"]) == 2
    assert cli.main(["moments", "--alpha", "1,1,1", "--degree", "x"]) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": [1, 1, 1], "bogus": 1}))
    assert cli.main(["moments", "--config", str(cfg)]) == 2
    assert cli.main(["sharpness", "--alpha", "0.5,0.5,1", "--families", "bump", "--eps-grid", "0.1,0.05"]) == 2
    assert "error:" in capsys.readouterr().err


def test_numerical_alarm_exit_3(capsys):
    code = cli.main(["simulate", "--alpha", "0.02,0.02,0.02", "--dt", "0.01", "--steps", "20000",
                     "--burn-in", "0"])
    assert code == 3
    assert "ClampExplosion" in capsys.readouterr().err


def test_localize(tmp_path, capsys):
    code, out, _, files = run(tmp_path, "l", ["localize", "--alpha", "1,1,2"], capsys)
    assert code == 0 and "match=True" in out
    assert json.loads(files["localization.json"])["p_alpha"] == 5.0


def test_config_file_then_flags(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": [2, 1, 1], "degree": 1}))
    code, out, _, files = run(tmp_path, "m", ["moments", "--config", str(cfg), "--degree", "2"], capsys)
    assert code == 0
    lines = files["moments.csv"].decode().splitlines()
    assert len(lines) == 1 + 6
    assert "E[x^(2, 0)] = 0.3" in out


COMMANDS = [
    ["gap", "--alpha", "1,1,1", "--models", "dirichlet,fv,gem", "--samples", "300000", "--degree", "2"],
    ["spectrum", "--alpha", "0.5,1,2", "--k", "4"],
    ["sharpness", "--alpha", "1,1,1", "--families", "corner_all", "--samples", "300000"],
    ["nash-scan", "--alpha", "0.5,0.5,1", "--samples", "300000"],
    ["localize", "--alpha", "0.5,0.5,1"],
    ["simulate", "--alpha", "2,1,1", "--steps", "200000", "--burn-in", "1000"],
    ["sample", "--alpha", "0.5,1,2", "--count", "300000"],
    ["moments", "--alpha", "0.5,1,2", "--degree", "3"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=[c[0] for c in COMMANDS])
def test_byte_determinism_across_thread_caps(tmp_path, capsys, argv):
    a = run(tmp_path, "a", argv + ["--threads", "1"], capsys)
    b = run(tmp_path, "b", argv + ["--threads", "4"], capsys)
    c = run(tmp_path, "c", argv + ["--threads", "4"], capsys)
    assert a[0] == 0, a[2]
    assert a == b == c


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "simplex_spectra", "moments", "--alpha", "2,1,1"],
                         capture_output=True, text=True, env=dict(os.environ))
    assert out.returncode == 0 and "E[x^(1, 0)] = 0.5" in out.stdout
