"""File I/O: configuration text, density matrices and CSV tables."""

import csv
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import CavityThermoError, ThermoFileError
from .linalg import DensityMatrix
from .parser import ConfigDocument, parse_config
from .serializer import stringify_config
from .streaming import csv_row_writer


def _existing_file(file_path: Union[str, Path]) -> Path:
    path = Path(file_path)
    if not path.exists():
        raise ThermoFileError(f"File not found: {file_path}")
    if not path.is_file():
        raise ThermoFileError(f"Not a file: {file_path}")
    return path


def _writable(file_path: Union[str, Path], overwrite: bool) -> Path:
    path = Path(file_path)
    if path.exists() and not overwrite:
        raise ThermoFileError(f"File already exists: {file_path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def read_text(file_path: Union[str, Path]) -> str:
    """
    Read a UTF-8 text file.

    Raises:
        ThermoFileError: If file cannot be read
    """
    path = _existing_file(file_path)
    try:
        return path.read_text(encoding="utf-8")
    except Exception as e:
        raise ThermoFileError(f"Failed to read file {file_path}: {e}") from e


def read_config(file_path: Union[str, Path]) -> ConfigDocument:
    """
    Read and parse a configuration file into ``{section: {key: value}}``.

    Raises:
        ThermoFileError: If file cannot be read
        ConfigError: If the file is not valid INI
    """
    return parse_config(read_text(file_path))


def write_config(
    document: ConfigDocument, file_path: Union[str, Path], overwrite: bool = True
) -> None:
    """
    Write a configuration document.

    Raises:
        ThermoFileError: If file exists and overwrite=False, or cannot be written
    """
    path = _writable(file_path, overwrite)
    text = stringify_config(document)
    try:
        path.write_text(text, encoding="utf-8")
    except Exception as e:
        raise ThermoFileError(f"Failed to write file {file_path}: {e}") from e


def write_state(rho: DensityMatrix, file_path: Union[str, Path], overwrite: bool = True) -> None:
    """
    Save a density matrix as a ``.npy`` array.

    Raises:
        ThermoFileError: If file exists and overwrite=False, or cannot be written
    """
    path = _writable(file_path, overwrite)
    try:
        with open(path, "wb") as f:
            np.save(f, np.asarray(rho.data), allow_pickle=False)
    except Exception as e:
        raise ThermoFileError(f"Failed to write state {file_path}: {e}") from e


def read_state(file_path: Union[str, Path], expected_dim: Optional[int] = None) -> DensityMatrix:
    """
    Load a density matrix saved with :func:`write_state`.

    Args:
        file_path: ``.npy`` file holding a square complex array
        expected_dim: Required Hilbert dimension, if known

    Raises:
        ThermoFileError: If the file cannot be read or is not a valid state
    """
    path = _existing_file(file_path)
    try:
        data = np.load(path, allow_pickle=False)
    except Exception as e:
        raise ThermoFileError(f"Failed to read state {file_path}: {e}") from e

    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ThermoFileError(f"State in {file_path} is not a square matrix: shape {data.shape}")
    if expected_dim is not None and data.shape[0] != expected_dim:
        raise ThermoFileError(
            f"State in {file_path} has dimension {data.shape[0]}, model needs {expected_dim}"
        )
    try:
        return DensityMatrix(data.astype(complex))
    except CavityThermoError as e:
        raise ThermoFileError(f"Invalid density matrix in {file_path}: {e}") from e


def write_csv(
    rows: Sequence[Mapping[str, Any]],
    file_path: Union[str, Path],
    columns: Optional[Sequence[str]] = None,
    overwrite: bool = True,
) -> int:
    """
    Write dict rows as CSV.

    Args:
        rows: Rows keyed by column name
        file_path: Output path
        columns: Column order (default: keys of the first row)
        overwrite: If False, raise error if file exists

    Returns:
        Number of data rows written
    """
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    path = _writable(file_path, overwrite)
    try:
        with csv_row_writer(path, columns, auto_flush=False) as writer:
            writer.write_items(rows)
            return writer.row_count
    except OSError as e:
        raise ThermoFileError(f"Failed to write file {file_path}: {e}") from e


def read_csv(file_path: Union[str, Path]) -> List[Dict[str, float]]:
    """Read a CSV written by :func:`write_csv`; numeric cells become floats."""
    path = _existing_file(file_path)
    rows: List[Dict[str, float]] = []
    with open(path, encoding="utf-8", newline="") as f:
        for record in csv.DictReader(f):
            rows.append({k: _cell(v) for k, v in record.items()})
    return rows


def _cell(value: str) -> Any:
    try:
        return float(value)
    except ValueError:
        return value
