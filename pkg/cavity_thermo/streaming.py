"""Streaming CSV writer for sweep and trajectory rows."""

import csv
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, List, Mapping, Optional, Sequence, TextIO, Union

from .serializer import format_csv_value


class CsvRowWriter:
    """
    Write CSV rows as they are produced.

    Example:
        ```python
        with CsvRowWriter("sweep.csv") as writer:
            writer.begin(["delta", "P_conv", "Sigma_io"])
            for row in rows:
                writer.write_item(row)
        ```
    """

    def __init__(self, output: Union[str, Path, TextIO], auto_flush: bool = True):
        """
        Args:
            output: File path or file-like object to write to
            auto_flush: Flush after each row
        """
        self.auto_flush = auto_flush
        self._file_owned = False
        self._file: Optional[TextIO] = None
        self._writer: Any = None
        self._fields: Optional[List[str]] = None
        self._row_count = 0
        self._output_path: Optional[Path] = None

        if isinstance(output, (str, Path)):
            self._output_path = Path(output)
            self._file_owned = True
        else:
            self._file = output

    def __enter__(self) -> "CsvRowWriter":
        if self._file_owned and self._output_path:
            self._output_path.parent.mkdir(parents=True, exist_ok=True)
            self._file = open(self._output_path, "w", encoding="utf-8", newline="")
        if self._file is not None:
            self._writer = csv.writer(self._file, lineterminator="\n")
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        if self._file_owned and self._file:
            self._file.close()

    @property
    def row_count(self) -> int:
        return self._row_count

    def begin(self, fields: Sequence[str]) -> None:
        """
        Write the header row.

        Raises:
            RuntimeError: If a header was already written or no output is open
        """
        if self._fields is not None:
            raise RuntimeError("Header already written")
        if self._writer is None:
            raise RuntimeError("No output file opened")
        self._fields = list(fields)
        self._writer.writerow(self._fields)
        self._flush()

    def write_row(self, values: Sequence[Any]) -> None:
        """
        Write one row of values in header order.

        Raises:
            RuntimeError: If no header was written
            ValueError: If the value count doesn't match the header
        """
        if self._fields is None:
            raise RuntimeError("No header written. Call begin() first.")
        if len(values) != len(self._fields):
            raise ValueError(f"Expected {len(self._fields)} values, got {len(values)}")
        self._writer.writerow([format_csv_value(v) for v in values])
        self._row_count += 1
        self._flush()

    def write_item(self, item: Mapping[str, Any]) -> None:
        """Write a dict row; missing columns are written as NaN."""
        if self._fields is None:
            raise RuntimeError("No header written. Call begin() first.")
        self.write_row([item.get(name, float("nan")) for name in self._fields])

    def write_items(self, items: Sequence[Mapping[str, Any]]) -> None:
        for item in items:
            self.write_item(item)

    def _flush(self) -> None:
        if self.auto_flush and self._file is not None:
            self._file.flush()


@contextmanager
def csv_row_writer(
    output: Union[str, Path, TextIO],
    fields: Sequence[str],
    auto_flush: bool = True,
) -> Iterator[CsvRowWriter]:
    """
    Open a writer with its header already written.

    Example:
        ```python
        with csv_row_writer("out.csv", ["t", "Sigma_conv"]) as writer:
            writer.write_row([0.0, 0.0])
        ```
    """
    with CsvRowWriter(output, auto_flush=auto_flush) as writer:
        writer.begin(fields)
        yield writer
