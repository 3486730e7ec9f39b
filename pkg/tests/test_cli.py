"""Tests for config parsing and the command-line entry points."""

from __future__ import annotations

import os

import numpy as np
import pytest

from nlode.cli import (
    ConfigError,
    _build_forcing,
    _parse_grid,
    diagnose,
    main,
    parse_config_text,
    run,
)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def config_path(name: str) -> str:
    return os.path.abspath(os.path.join(CONFIG_DIR, name))


FULL_TEXT = """\
# comment line
mode = classical-ivp
symbol = (s + 1)*(s + 2)
forcing = exp(-3*t)
sigma = 0.5
y_max = 150
quad_tol = 1e-8
grid = 0:4:9
output_csv = out.csv
output_report = out.report.txt

[poles]
-1 0 1
-2 0 1

[initial_values]
1
0 0.25
"""


class TestGrid:
    def test_parse(self):
        assert _parse_grid("0:10:201") == (0.0, 10.0, 201)

    @pytest.mark.parametrize("bad", ["0:10", "a:b:c", "5:1:10", "0:10:1", "-1:10:5"])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            _parse_grid(bad)


class TestParseConfig:
    def test_full_round_trip(self):
        cfg = parse_config_text(FULL_TEXT)
        assert cfg.mode == "classical-ivp"
        assert cfg.symbol_text == "(s + 1)*(s + 2)"
        assert cfg.sigma == 0.5
        assert cfg.y_max == 150.0
        assert cfg.quad_tol == 1e-8
        assert cfg.grid == (0.0, 4.0, 9)
        assert cfg.poles == ((-1.0, 0.0, 1), (-2.0, 0.0, 1))
        assert cfg.initial_values == (1.0 + 0j, 0.25j)

    def test_defaults(self):
        cfg = parse_config_text("mode = diagnose\nsymbol = exp(s)\n")
        assert cfg.sigma == 1.0 and cfg.y_max == 200.0 and cfg.grid == (0.0, 10.0, 201)

    @pytest.mark.parametrize("text,fragment", [
        ("symbol = s\n", "mode"),
        ("mode = classical-ivp\n", "symbol"),
        ("mode = bogus\nsymbol = s\n", "mode must be one of"),
        ("mode = diagnose\nsymbol = s\ncolor = red\n", "unknown key"),
        ("mode = diagnose\nsymbol = s\n[weights]\n", "unknown section"),
        ("mode = diagnose\nsymbol = s\njust words\n", "key = value"),
        ("mode = diagnose\nsymbol = s\n[poles]\n-1 0\n", "re im order"),
        ("mode = diagnose\nsymbol = s\n[poles]\na b c\n", "not numeric"),
        ("mode = diagnose\nsymbol = s\n[initial_values]\n1 2 3\n", "re"),
    ])
    def test_rejects(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config_text(text)

    @pytest.mark.parametrize("text,fragment", [
        ("mode = generalized\nsymbol = s\noutput_csv = x.csv\n", "gic"),
        ("mode = poles-given\nsymbol = s\ngic = s\noutput_csv = x.csv\n", "poles"),
        ("mode = classical-ivp\nsymbol = s\noutput_csv = x.csv\n"
         "[initial_values]\n1\n", "poles"),
        ("mode = classical-ivp\nsymbol = s\noutput_csv = x.csv\n"
         "[poles]\n-1 0 1\n", "initial_values"),
        ("mode = classical-ivp\nsymbol = s\noutput_csv = x.csv\n"
         "[poles]\n-1 0 2\n[initial_values]\n1\n", "initial_values must supply"),
        ("mode = generalized\nsymbol = s\ngic = s\n", "output_csv"),
    ])
    def test_mode_field_requirements(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config_text(text)


class TestBuildForcing:
    def test_expression(self):
        J = _build_forcing("exp(-3*t)")
        assert abs(J.j_eval(np.array([1.0]))[0] - np.exp(-3.0)) < 1e-15

    def test_builtin(self):
        J = _build_forcing("builtin exp_decay rate=3")
        assert abs(J.j_eval(np.array([1.0]))[0] - np.exp(-3.0)) < 1e-15

    def test_builtin_zero(self):
        J = _build_forcing("builtin zero")
        assert J.is_zero

    def test_unknown_builtin(self):
        with pytest.raises(ValueError):
            _build_forcing("builtin sawtooth")

    def test_bad_builtin_params(self):
        with pytest.raises(ConfigError, match="key=value"):
            _build_forcing("builtin exp_decay rate")


def write_cfg(tmp_path, text: str) -> str:
    path = tmp_path / "problem.cfg"
    path.write_text(text, encoding="utf-8")
    return str(path)


FAST_IVP = """\
mode = classical-ivp
symbol = (s + 1)*(s + 2)
forcing = exp(-3*t)
grid = 0:2:9
output_csv = fast.csv
output_report = fast.report.txt

[poles]
-1 0 1
-2 0 1

[initial_values]
1
0
"""


class TestRun:
    def test_solve_writes_csv_and_report(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        code = run(write_cfg(tmp_path, FAST_IVP))
        assert code == 0
        assert "wrote fast.csv" in capsys.readouterr().out
        rows = (tmp_path / "fast.csv").read_text().splitlines()
        assert rows[0] == "t,phi_re,phi_im,bromwich_re,bromwich_im,residue_re,residue_im"
        assert len(rows) == 10
        first = [float(x) for x in rows[1].split(",")]
        assert first[0] == 0.0 and abs(first[1] - 1.0) < 1e-7
        report = (tmp_path / "fast.report.txt").read_text()
        assert "status: ok" in report
        assert "mode: classical-ivp" in report
        assert "initial_value_errors:" in report
        assert "residual_sup:" in report

    def test_solution_matches_closed_form(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert run(write_cfg(tmp_path, FAST_IVP)) == 0
        data = np.genfromtxt(tmp_path / "fast.csv", delimiter=",", skip_header=1)
        ts = data[:, 0]
        expect = 2.5 * np.exp(-ts) - 2.0 * np.exp(-2 * ts) + 0.5 * np.exp(-3 * ts)
        assert np.max(np.abs(data[:, 1] - expect)) < 1e-7
        assert np.max(np.abs(data[:, 2])) < 1e-9

    def test_rerun_is_byte_identical(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = write_cfg(tmp_path, FAST_IVP)
        assert run(cfg) == 0
        first = (tmp_path / "fast.csv").read_bytes()
        assert run(cfg) == 0
        assert (tmp_path / "fast.csv").read_bytes() == first

    def test_missing_config_is_exit_1(self, tmp_path, capsys):
        assert run(str(tmp_path / "nope.cfg")) == 1
        assert "config error" in capsys.readouterr().err

    def test_broken_config_is_exit_1(self, capsys):
        assert run(config_path("broken_missing_symbol.cfg")) == 1
        assert "config error" in capsys.readouterr().err

    def test_hypothesis_failure_is_exit_2(self, tmp_path, monkeypatch, capsys):
        # the declared pole -4 is not a zero of (s + 1)*(s + 2)
        text = FAST_IVP.replace("-2 0 1", "-4 0 1")
        monkeypatch.chdir(tmp_path)
        assert run(write_cfg(tmp_path, text)) == 2
        assert "hypothesis failure" in capsys.readouterr().err

    def test_grid_override(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = run(write_cfg(tmp_path, FAST_IVP), {"grid": "0:2:5"})
        assert code == 0
        rows = (tmp_path / "fast.csv").read_text().splitlines()
        assert len(rows) == 6


class TestDiagnose:
    def test_healthy_problem_passes(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert diagnose(write_cfg(tmp_path, FAST_IVP)) == 0
        out = capsys.readouterr().out
        assert "result: PASS" in out
        assert "FAIL" not in out

    def test_axis_pole_fails(self, capsys):
        assert diagnose(config_path("diagnose_pole_at_origin.cfg")) == 2
        out = capsys.readouterr().out
        assert "result: FAIL" in out

    def test_duplicate_pole_fails(self, tmp_path, capsys):
        text = ("mode = diagnose\nsymbol = (s + 1)*(s + 2)\nforcing = exp(-3*t)\n"
                "[poles]\n-1 0 1\n-1 0 1\n")
        assert diagnose(write_cfg(tmp_path, text)) == 2
        out = capsys.readouterr().out
        assert "pairwise distinct" in out

    def test_broken_config_is_exit_1(self, tmp_path, capsys):
        assert diagnose(str(tmp_path / "nope.cfg")) == 1
        assert "config error" in capsys.readouterr().err


class TestGoldenAccuracy:
    """The frozen CSVs are not just stable; they are right."""

    def load(self, name):
        path = os.path.join(os.path.dirname(__file__), "golden", name)
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        return data[:, 0], data[:, 1] + 1j * data[:, 2]

    def test_damped_oscillator(self):
        ts, phi = self.load("damped_oscillator_ivp.csv")
        exact = 2.5 * np.exp(-ts) - 2.0 * np.exp(-2 * ts) + 0.5 * np.exp(-3 * ts)
        assert np.max(np.abs(phi - exact)) < 1e-6

    def test_exp_symbol_eigenfunction(self):
        ts, phi = self.load("exp_symbol_eigenfunction.csv")
        assert np.max(np.abs(phi - np.exp(-0.5 * ts))) < 1e-7

    def test_zeta_symbol_ivp(self):
        ts, phi = self.load("zeta_symbol_ivp.csv")
        assert np.max(np.abs(phi - np.exp(-5.0 * ts))) < 1e-12


class TestMain:
    def test_solve_subcommand(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = write_cfg(tmp_path, FAST_IVP)
        assert main(["solve", cfg, "--grid", "0:2:5"]) == 0
        assert len((tmp_path / "fast.csv").read_text().splitlines()) == 6

    def test_diagnose_subcommand(self, capsys):
        assert main(["diagnose", config_path("diagnose_pole_at_origin.cfg")]) == 2
        assert "result: FAIL" in capsys.readouterr().out

    def test_requires_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
