"""
End-to-end tests for the periodic-asymptotics command line.

These run whole pipelines through ``main`` and check exit codes, printed
reports and written artifacts.

Run these tests with: pytest tests/integration/test_cli.py -v
"""

import argparse
from unittest.mock import patch

import pytest

from periodic_asymptotics.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_parser, collect_overrides, main
from periodic_asymptotics.config import ConfigError
from periodic_asymptotics.errors import InvariantViolation

pytestmark = pytest.mark.integration


class TestCollectOverrides:
    """Tests for turning flags into run-file keys."""

    def test_flags_and_assignments(self):
        """Test that flags and --set pairs merge into one mapping."""
        args = build_parser().parse_args(
            ["run", "x.cfg", "--n", "128", "--out", "o", "--set", "region.delta=0.4", "--set", " rates.stride = 2 "]
        )

        assert collect_overrides(args) == {"n": "128", "output": "o", "region.delta": "0.4", "rates.stride": "2"}

    def test_malformed_assignment(self):
        """Test that --set needs KEY=VALUE."""
        args = argparse.Namespace(assignments=["delta"])
        with pytest.raises(ConfigError, match="KEY=VALUE"):
            collect_overrides(args)


class TestRunCommand:
    """Tests for the run subcommand."""

    def test_successful_run(self, temp_run_config, capsys):
        """
        Test exit code, printed report and run log.

        :param temp_run_config: Pytest fixture providing a run file
        :ptype temp_run_config: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        """
        code = main(["run", str(temp_run_config), "--horizon", "30"])

        out = capsys.readouterr().out
        output_dir = temp_run_config.parent / "out"
        assert code == EXIT_OK
        assert "horizon: 30" in out
        assert f"Artifacts written to {output_dir}" in out
        assert (output_dir / "report.txt").exists()
        assert (output_dir / "run.log").exists()

    def test_set_override(self, temp_run_config, capsys):
        """
        Test that --set replaces run-file keys.

        :param temp_run_config: Pytest fixture providing a run file
        :ptype temp_run_config: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        """
        code = main(["run", str(temp_run_config), "--tasks", "monodromy", "--set", "region.delta=0.5"])

        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "delta: 5.0000000000000000e-01" in out

    @pytest.mark.parametrize(
        "extra,message",
        [
            (["--set", "oops"], "--set expects KEY=VALUE"),
            (["--n", "100"], "power of two"),
            (["--set", "region.delta=2.0"], "invalid region"),
            (["--set", "colour=red"], "unknown key"),
            (["--tasks", ""], "tasks must name"),
        ],
    )
    def test_invalid_configuration(self, temp_run_config, capsys, extra, message):
        """
        Test exit code 2 with an error line on stderr.

        :param temp_run_config: Pytest fixture providing a run file
        :ptype temp_run_config: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        :param extra: Additional arguments
        :ptype extra: list[str]
        :param message: Expected message fragment
        :ptype message: str
        """
        code = main(["run", str(temp_run_config), *extra])

        err = capsys.readouterr().err
        assert code == EXIT_CONFIG
        assert err.startswith("ERROR: ")
        assert message in err

    def test_missing_run_file(self, tmp_path, capsys):
        """
        Test a run file that does not exist.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        """
        assert main(["run", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG
        assert "run file not found" in capsys.readouterr().err

    def test_numerical_failure(self, temp_run_config, capsys):
        """
        Test exit code 3 when an invariant fails.

        :param temp_run_config: Pytest fixture providing a run file
        :ptype temp_run_config: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        """
        with patch("periodic_asymptotics.cli.run", side_effect=InvariantViolation("norm 1.5", "contraction")):
            code = main(["run", str(temp_run_config)])

        assert code == EXIT_NUMERICAL
        assert "invariant 'contraction' failed" in capsys.readouterr().err


class TestReproduceCommand:
    """Tests for the reproduce-example subcommand."""

    @pytest.mark.slow
    def test_stable_corner_square(self, tmp_path, capsys):
        """
        Test a fully passing reproduction.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        """
        out_dir = tmp_path / "example"
        code = main(["reproduce-example", "4.2", "--delta", "0.75", "--n", "256", "--out", str(out_dir)])

        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "[claims]" in out
        assert (out_dir / "claims.csv").exists()
        assert (out_dir / "run.log").exists()

    def test_delta_out_of_range(self, tmp_path, capsys):
        """
        Test exit code 2 for an invalid shape parameter.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        :param capsys: Pytest fixture capturing stdout and stderr
        :ptype capsys: pytest.CaptureFixture
        """
        code = main(["reproduce-example", "4.2", "--delta", "1.5", "--out", str(tmp_path)])

        assert code == EXIT_CONFIG
        assert "requires delta" in capsys.readouterr().err

    def test_unknown_example_is_rejected_by_parser(self):
        """Test argparse choices."""
        with pytest.raises(SystemExit) as excinfo:
            main(["reproduce-example", "9.9"])
        assert excinfo.value.code == 2
