"""
Tests for the reporting module.

Run these tests with: pytest tests/unit/test_reporting.py -v
"""

import math

import numpy as np
import pytest

from periodic_asymptotics.reporting import (
    REPORT_NAME,
    Claim,
    ClaimStatus,
    Report,
    format_value,
    read_csv,
    write_csv,
)


class TestFormatValue:
    """Tests for cell rendering."""

    @pytest.mark.parametrize(
        "value,expected",
        [
            (True, "true"),
            (np.bool_(False), "false"),
            (3, "3"),
            (np.int64(7), "7"),
            (0.5, "5.0000000000000000e-01"),
            (math.nan, "nan"),
            (-math.inf, "-inf"),
            (1 - 2j, "1.0000000000000000e+00-2.0000000000000000e+00j"),
            ("text", "text"),
        ],
    )
    def test_values(self, value, expected):
        """
        Test rendering of each supported type.

        :param value: Cell value
        :ptype value: object
        :param expected: Rendered text
        :ptype expected: str
        """
        assert format_value(value) == expected

    def test_float_round_trip(self):
        """Test that 17 significant digits reproduce the float exactly."""
        value = 1.0 / 3.0
        assert float(format_value(value)) == value


class TestCsv:
    """Tests for CSV artifacts."""

    def test_write_and_read(self, tmp_path):
        """
        Test header, float format and parent creation.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        path = write_csv(tmp_path / "nested" / "decay.csv", ["n", "norm"], [(0, 1.0), (1, 0.25)])

        header, rows = read_csv(path)

        assert header == ["n", "norm"]
        assert rows == [["0", "1.0000000000000000e+00"], ["1", "2.5000000000000000e-01"]]
        assert path.read_text(encoding="utf-8").endswith("\n")

    def test_identical_runs_are_byte_identical(self, tmp_path):
        """
        Test deterministic output.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        rows = [(k, math.exp(-k)) for k in range(5)]
        first = write_csv(tmp_path / "a.csv", ["n", "value"], rows).read_bytes()
        second = write_csv(tmp_path / "b.csv", ["n", "value"], rows).read_bytes()

        assert first == second

    def test_row_length_mismatch(self, tmp_path):
        """
        Test that ragged rows are rejected.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        with pytest.raises(ValueError, match="cells"):
            write_csv(tmp_path / "bad.csv", ["a", "b"], [(1,)])


class TestClaims:
    """Tests for claim status."""

    @pytest.mark.parametrize(
        "predicted,observed,status",
        [
            (True, True, ClaimStatus.PASS),
            (False, False, ClaimStatus.FAIL_AS_EXPECTED),
            (True, False, ClaimStatus.FAIL),
            (False, True, ClaimStatus.FAIL),
            (None, True, ClaimStatus.INFO),
        ],
    )
    def test_status(self, predicted, observed, status):
        """
        Test every prediction/observation combination.

        :param predicted: Predicted truth value
        :ptype predicted: bool | None
        :param observed: Observed truth value
        :ptype observed: bool
        :param status: Expected status
        :ptype status: ClaimStatus
        """
        assert Claim("x", predicted, observed, "rates").status is status


class TestReport:
    """Tests for report.txt rendering."""

    def test_render_sections_and_claims(self):
        """Test layout of sections and the claim table."""
        report = Report("transport corner_square")
        report.add("spectrum", radius=0.5, converged=True)
        report.claim(Claim("bounded", True, True, "spectral", "ok"))
        report.claim(Claim("gcc", False, False, "observability"))

        text = report.render()

        assert text.startswith("transport corner_square\n=======================\n")
        assert "[spectrum]\nradius: 5.0000000000000000e-01\nconverged: true\n" in text
        assert "PASS             bounded  predicted=true observed=true  [spectral] ok" in text
        assert "FAIL-as-expected gcc      predicted=false observed=false  [observability]\n" in text
        assert not report.failed

    def test_failed_claim(self, capture_logs):
        """
        Test that a disagreement marks the report failed and logs a warning.

        :param capture_logs: Pytest fixture capturing log output
        :ptype capture_logs: StringIO
        """
        report = Report("r")
        report.claim(Claim("decays", True, False, "rates"))

        assert report.failed
        assert "WARNING: FAIL: decays" in capture_logs.getvalue()

    def test_write(self, tmp_path):
        """
        Test writing report.txt.

        :param tmp_path: Pytest fixture providing temporary directory
        :ptype tmp_path: Path
        """
        report = Report("r")
        report.section("notes").append("free text")

        path = report.write(tmp_path / "run")

        assert path.name == REPORT_NAME
        assert "[notes]\nfree text\n" in path.read_text(encoding="utf-8")
