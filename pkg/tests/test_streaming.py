"""Tests for the streaming CSV writer."""

import io

import pytest

from cavity_thermo.streaming import CsvRowWriter, csv_row_writer


class TestCsvRowWriter:
    """Test incremental row output."""

    def test_rows_to_file(self, tmp_path):
        """Test a header and rows written to a path."""
        path = tmp_path / "out" / "trajectory.csv"
        with CsvRowWriter(path) as writer:
            writer.begin(["t", "Sigma_conv"])
            writer.write_row([0.0, 0.5])
            writer.write_item({"t": 1.0, "Sigma_conv": 0.25})
            assert writer.row_count == 2
        assert path.read_text() == "t,Sigma_conv\n0,0.5\n1,0.25\n"

    def test_stream(self):
        """Test writing to an open text stream."""
        buffer = io.StringIO()
        with csv_row_writer(buffer, ["check", "residual"]) as writer:
            writer.write_row(["heat.decomposition", 1e-12])
        assert buffer.getvalue() == "check,residual\nheat.decomposition,9.9999999999999998e-13\n"

    def test_missing_columns_are_nan(self):
        """Test that absent dict keys become nan."""
        buffer = io.StringIO()
        with csv_row_writer(buffer, ["a", "b"]) as writer:
            writer.write_items([{"a": 1}])
        assert buffer.getvalue().splitlines()[1] == "1,nan"

    def test_header_required(self):
        """Test that rows need a header first."""
        with CsvRowWriter(io.StringIO()) as writer:
            with pytest.raises(RuntimeError, match="begin"):
                writer.write_row([1])

    def test_header_once(self):
        """Test that the header is written once."""
        with CsvRowWriter(io.StringIO()) as writer:
            writer.begin(["a"])
            with pytest.raises(RuntimeError, match="already"):
                writer.begin(["a"])

    def test_row_length(self):
        """Test that rows match the header."""
        with csv_row_writer(io.StringIO(), ["a", "b"]) as writer:
            with pytest.raises(ValueError, match="Expected 2"):
                writer.write_row([1])

    def test_not_opened(self, tmp_path):
        """Test that a path writer must be entered."""
        writer = CsvRowWriter(tmp_path / "x.csv")
        with pytest.raises(RuntimeError, match="No output"):
            writer.begin(["a"])
