"""Serialization of configuration documents and CSV cells."""

import math
from typing import Any, Dict

from .errors import ConfigError


def stringify_config(document: Dict[str, Dict[str, Any]]) -> str:
    """
    Serialize ``{section: {key: value}}`` to INI text.

    The output parses back to the same document with
    :func:`cavity_thermo.parser.parse_config`.

    Args:
        document: Sections of typed values

    Returns:
        INI formatted string (sections separated by a blank line)

    Raises:
        ConfigError: If a value cannot be represented
    """
    blocks = []
    for section, values in document.items():
        if not isinstance(values, dict):
            raise ConfigError(f"section [{section}] must map keys to values", field=section)
        lines = [f"[{section}]"]
        for key, value in values.items():
            lines.append(f"{key} = {_format_value(value, key)}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def _format_value(value: Any, key: str = "") -> str:
    """Format one value; lists become comma lists (a single item keeps a trailing comma)."""
    if isinstance(value, (list, tuple)):
        if not value:
            return ","
        items = [_format_scalar(item, key) for item in value]
        joined = ", ".join(items)
        return joined + "," if len(items) == 1 else joined
    return _format_scalar(value, key)


def _format_scalar(value: Any, key: str) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _format_float(value)
    if isinstance(value, complex):
        sign = "+" if value.imag >= 0 or math.isnan(value.imag) else "-"
        return f"{_format_float(value.real)}{sign}{_format_float(abs(value.imag))}j"
    if isinstance(value, str):
        return _quote_if_needed(value)
    raise ConfigError(f"cannot serialize value of type {type(value).__name__}", field=key)


def _format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _quote_if_needed(s: str) -> str:
    """
    Quote a string if it would otherwise parse as something else.

    Strings with commas, quotes, comment characters, or leading/trailing
    whitespace, and strings that look like numbers, booleans or null, are quoted.
    """
    if not s:
        return '""'

    needs_quotes = (
        "," in s
        or '"' in s
        or "#" in s
        or ";" in s
        or s != s.strip()
        or s.lower() in ("true", "false", "null", "none")
        or _is_numeric(s)
    )

    if needs_quotes:
        escaped = s.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'

    return s


def _is_numeric(s: str) -> bool:
    """Check if string looks like a real or complex number."""
    try:
        float(s)
        return True
    except ValueError:
        pass
    try:
        complex(s.strip("()"))
        return True
    except ValueError:
        return False


def format_csv_value(value: Any) -> str:
    """
    Format one CSV cell.

    Floats use 17 significant digits (``%.17g``) so output is byte-stable and
    lossless; NaN is written ``nan`` and infinities ``inf``/``-inf``.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.17g" % value
    if isinstance(value, complex):
        sign = "+" if value.imag >= 0 else "-"
        return f"{format_csv_value(value.real)}{sign}{format_csv_value(abs(value.imag))}j"
    if hasattr(value, "item"):
        return format_csv_value(value.item())
    return str(value)
