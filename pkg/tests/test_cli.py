"""Tests for the command-line interface."""

import pytest

from cavity_thermo.cli import main
from cavity_thermo.io import read_csv

SMALL = ["--preset", "empty", "--n-max", "12"]


class TestSteady:
    """Test the steady command."""

    def test_report_and_audit(self, capsys):
        """Test the printed report and audit summary."""
        assert main(["steady", "--preset", "empty"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("[report]")
        assert "[temperatures]" in out
        assert "audit passed" in out

    def test_no_audit_with_csv(self, tmp_path, capsys):
        """Test a single-row CSV without the audit."""
        path = tmp_path / "steady.csv"
        assert main(["steady", *SMALL, "--no-audit", "--out", str(path)]) == 0
        assert "audit" not in capsys.readouterr().out
        rows = read_csv(path)
        assert len(rows) == 1
        assert rows[0]["P_conv"] > 0

    def test_config_file(self, empty_config_file, capsys):
        """Test a run described by a configuration file."""
        assert main(["steady", "--config", str(empty_config_file), "--no-audit"]) == 0
        assert "Sigma_conv" in capsys.readouterr().out

    def test_overrides(self, tmp_path):
        """Test that --delta and --set reach the model."""
        path = tmp_path / "steady.csv"
        argv = ["steady", *SMALL, "--delta", "1", "--set", "drive.amplitude=0", "--no-audit"]
        assert main([*argv, "--out", str(path)]) == 0
        assert read_csv(path)[0]["P_conv"] == pytest.approx(0.0, abs=1e-10)


class TestSweep:
    """Test the sweep command."""

    def test_values_to_csv(self, tmp_path):
        """Test one CSV row per value."""
        path = tmp_path / "sweep.csv"
        argv = ["sweep", *SMALL, "--no-audit", "--param", "drive.delta", "--values", "0,1"]
        assert main([*argv, "--out", str(path)]) == 0
        rows = read_csv(path)
        assert [row["drive.delta"] for row in rows] == [0.0, 1.0]

    def test_range_and_outputs(self, tmp_path):
        """Test a linear range and selected columns."""
        path = tmp_path / "sweep.csv"
        argv = [
            "sweep",
            *SMALL,
            "--no-audit",
            "--param",
            "channels.cavity.occupation",
            "--start",
            "0.1",
            "--stop",
            "0.3",
            "--count",
            "3",
            "--outputs",
            "Sigma_conv,Sigma_io",
            "--out",
            str(path),
        ]
        assert main(argv) == 0
        assert path.read_text().splitlines()[0] == "channels.cavity.occupation,Sigma_conv,Sigma_io"
        assert len(read_csv(path)) == 3

    def test_stdout(self, capsys):
        """Test CSV on standard output."""
        assert main(["sweep", *SMALL, "--no-audit", "--param", "drive.delta", "--values", "0"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("drive.delta,U,P_conv")
        assert len(lines) == 2

    def test_failed_point(self, tmp_path, capsys):
        """Test that a failed point exits 1 and still writes its row."""
        path = tmp_path / "sweep.csv"
        argv = [
            "sweep",
            "--preset",
            "empty",
            "--n-max",
            "8",
            "--no-audit",
            "--param",
            "drive.amplitude",
            "--values",
            "0.1,2",
            "--out",
            str(path),
        ]
        assert main(argv) == 1
        assert "1 of 2 sweep points failed" in capsys.readouterr().err
        assert len(read_csv(path)) == 2

    def test_missing_parameter(self, capsys):
        """Test that a sweep needs a parameter."""
        assert main(["sweep", *SMALL, "--values", "0,1"]) == 64
        assert "--param" in capsys.readouterr().err

    def test_incomplete_range(self):
        """Test that range flags go together."""
        assert main(["sweep", *SMALL, "--param", "drive.delta", "--start", "0"]) == 64


class TestAudit:
    """Test the audit command."""

    def test_single_model(self, tmp_path, capsys):
        """Test an audit with its CSV of checks."""
        path = tmp_path / "audit.csv"
        assert main(["audit", "--preset", "empty", "--out", str(path)]) == 0
        assert "audit passed" in capsys.readouterr().out
        rows = read_csv(path)
        checks = {row["check"]: row["status"] for row in rows}
        assert checks["oracle.empty_cavity"] == "pass"
        assert checks["heat.tls_closed_form"] == "skipped"

    def test_fuzz_summary(self, capsys):
        """Test the summary line of a fuzz run."""
        code = main(["audit", "--fuzz", "2", "--seed", "5"])
        assert code in (0, 1)
        assert "models passed (seed 5)" in capsys.readouterr().out

    def test_fuzz_count(self):
        """Test that a fuzz run needs at least one model."""
        assert main(["audit", "--fuzz", "0"]) == 64


class TestEvolve:
    """Test the evolve command."""

    def test_trajectory(self, tmp_path):
        """Test a short trajectory written to CSV."""
        path = tmp_path / "evolve.csv"
        argv = ["evolve", *SMALL, "--initial", "thermal", "--t-end", "0.5", "--samples", "3"]
        assert main([*argv, "--out", str(path)]) == 0
        rows = read_csv(path)
        assert [row["t"] for row in rows] == [0.0, 0.25, 0.5]

    def test_coherent_alpha(self, tmp_path):
        """Test a coherent start given on the command line."""
        path = tmp_path / "evolve.csv"
        argv = ["evolve", *SMALL, "--initial", "coherent", "--alpha", "0.3-0.1j", "--samples", "2"]
        assert main([*argv, "--t-end", "0.1", "--out", str(path)]) == 0
        assert read_csv(path)[0]["abs_a_sq"] == pytest.approx(0.1, abs=1e-9)

    def test_file_needs_path(self, capsys):
        """Test that a file start needs --state-file."""
        assert main(["evolve", *SMALL, "--initial", "file"]) == 64
        assert "state_file" in capsys.readouterr().err

    def test_malformed_alpha(self, capsys):
        """Test that an amplitude that is not a number is a usage error."""
        assert main(["evolve", *SMALL, "--initial", "coherent", "--alpha", "abc"]) == 64
        assert "--alpha needs a complex number" in capsys.readouterr().err


class TestExitCodes:
    """Test the mapping of failures to exit codes."""

    def test_no_command(self, capsys):
        """Test that a command is required."""
        assert main([]) == 64
        assert "error" in capsys.readouterr().err

    def test_unknown_preset(self):
        """Test that choices are enforced."""
        assert main(["steady", "--preset", "laser"]) == 64

    def test_config_and_preset(self, empty_config_file):
        """Test that a configuration file and a preset exclude each other."""
        assert main(["steady", "--preset", "empty", "--config", str(empty_config_file)]) == 64

    def test_malformed_set(self):
        """Test that --set needs PATH=VALUE."""
        assert main(["steady", *SMALL, "--set", "drive.amplitude"]) == 64

    def test_missing_config(self, tmp_path):
        """Test that a missing configuration file is a usage error."""
        assert main(["steady", "--config", str(tmp_path / "missing.ini")]) == 64

    def test_internal_errors_propagate(self, monkeypatch):
        """Test that a bug inside a command is not reported as a usage error."""

        def broken(*args, **kwargs):
            raise ValueError("internal")

        monkeypatch.setattr("cavity_thermo.cli.solve_point", broken)
        with pytest.raises(ValueError, match="internal"):
            main(["steady", *SMALL])

    def test_dimension_overflow(self, capsys):
        """Test that an oversized model exits 2."""
        assert main(["steady", "--preset", "kerr", "--n-max", "300", "--no-audit"]) == 2
        assert "DimensionOverflowError" in capsys.readouterr().err

    def test_truncation(self):
        """Test that a leaking steady state exits 3."""
        argv = ["steady", "--preset", "empty", "--n-max", "8", "--set", "drive.amplitude=2"]
        assert main(argv) == 3
