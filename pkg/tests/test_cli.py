import io
import subprocess
import sys

import pytest

from xychain import cli
from xychain.errors import ToleranceError


def run(argv):
    out = io.StringIO()
    code = cli.run(argv, out=out)
    return code, out.getvalue()


def test_energy_side_by_side_on_circle():
    code, text = run(["energy", "--alpha", "0.6", "--gamma", "0.8"])
    assert code == 0
    for label in ("closed-form", "quadrature", "cyclic N=10000"):
        line = next(ln for ln in text.splitlines() if ln.strip().startswith(label))
        assert float(line.split()[-1]) == pytest.approx(-0.5, abs=1e-12)
    assert text.count("|") == 6


def test_derivatives_table_order_two():
    code, text = run(["derivatives", "--gamma", "0.6", "--max-order", "6"])
    assert code == 0
    rows = {int(ln.split()[0]): float(ln.split()[1]) for ln in text.splitlines() if ln.strip()[:1].isdigit()}
    assert sorted(rows) == [2, 3, 4, 5, 6]
    # d^2 eps / d alpha^2 = -chi = -1/(4 gamma)
    assert rows[2] == pytest.approx(-1 / (4 * 0.6), rel=1e-14)


def test_verify_quick_passes():
    code, text = run(["verify", "--quick"])
    assert code == 0, text
    assert "FAIL" not in text


def test_validation_errors_exit_2(capsys):
    assert run(["energy", "--alpha", "0.5", "--gamma", "2"])[0] == 2
    assert run(["energy", "--alpha", "0.5"])[0] == 2
    assert run(["bogus"])[0] == 2
    assert run(["scan", "--quantity", "gap"])[0] == 2
    assert run(["derivatives", "--gamma", "1.5"])[0] == 2
    assert "error" in capsys.readouterr().err


def test_computation_failure_exit_1(monkeypatch, capsys):
    def exhausted(*args, **kwargs):
        raise ToleranceError("budget exhausted", estimate=-0.5, error=1e-3)

    monkeypatch.setattr(cli.quadoracle, "ground_energy_integral", exhausted)
    assert run(["energy", "--alpha", "0.5", "--gamma", "0.5"])[0] == 1
    assert "computation failed" in capsys.readouterr().err


def test_scan_to_stdout_and_file(tmp_path):
    argv = ["scan", "--quantity", "energy", "--alpha-range", "0", "1", "3", "--gamma-range", "0", "1", "2", "--workers", "1"]
    code, text = run(argv)
    assert code == 0
    assert text.splitlines()[0] == "alpha,gamma,quantity,value,status"
    assert len(text.splitlines()) == 7
    code, _ = run(argv + ["--output", "e.csv", "--output-dir", str(tmp_path), "--plot-script"])
    assert code == 0
    assert (tmp_path / "e.csv").read_text() == text
    compile((tmp_path / "e.py").read_text(), "e.py", "exec")


def test_identical_config_gives_identical_csv(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# susceptibility map\nquantity = susceptibility\nalpha-range = 0, 2, 11\ngamma_range = 0 1 6\noutput = chi.csv\n"
    )
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "a"))
    assert run(["scan", "--config", str(cfg)])[0] == 0
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "b"))
    assert run(["scan", "--config", str(cfg), "--workers", "2"])[0] == 0
    first = (tmp_path / "a" / "chi.csv").read_bytes()
    assert first == (tmp_path / "b" / "chi.csv").read_bytes()
    assert b"divergent_line" in first


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 0.3\ngamma = 0.4\n")
    code, text = run(["energy", "--config", str(cfg), "--alpha", "1.5"])
    assert code == 0
    assert "alpha = 1.5" in text and "gamma = 0.4" in text


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("alpha = 0.3\ngamma = 0.4\ncolour = red\n")
    assert run(["energy", "--config", str(cfg)])[0] == 2
    cfg.write_text("alpha 0.3\n")
    assert run(["energy", "--config", str(cfg), "--alpha", "1", "--gamma", "1"])[0] == 2
    assert run(["energy", "--config", str(tmp_path / "missing.cfg"), "--alpha", "1", "--gamma", "1"])[0] == 2


def test_gap_reports_fit_and_sensitivity(tmp_path):
    code, text = run(["gap", "--alpha", "1.5", "--gamma", "0.6", "--ns", "40", "80", "160", "320", "640", "1000", "--output", str(tmp_path / "g.csv")])
    assert code == 0
    assert text.count("sub-range") == 2
    assert "a = 0.50" in text
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[1].startswith("1.5,0.59999999999999998,gap(N=40;open),")


def test_gap_mismatched_points_exit_2():
    assert run(["gap", "--alpha", "1.5", "1.3", "--gamma", "0.6"])[0] == 2


def test_expand_table():
    code, text = run(["expand", "--gamma", "1"])
    assert code == 0
    assert "susceptibility near alpha = 1" in text and "near gamma = 0" in text


def test_every_figure_has_a_preset():
    assert sorted(cli.FIGURES) == ["2", "3a", "3b", "4a", "4b", "5a", "5b", "5c", "5d"]


def test_figure_preset_writes_csv_and_script(tmp_path):
    code, text = run(["scan", "--figure", "3b", "--output-dir", str(tmp_path), "--workers", "1"])
    assert code == 0
    assert (tmp_path / "fig3b.csv").exists()
    compile((tmp_path / "fig3b.py").read_text(), "fig3b.py", "exec")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "xychain", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "xychain" in proc.stdout
