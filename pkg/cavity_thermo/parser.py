"""INI-style configuration parser with typed scalar values."""

import configparser
import re
from typing import Any, Dict, List, Tuple

from .errors import ConfigError

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]\s*$")
_OPTION_RE = re.compile(r"^\s*([^=:\s][^=:]*?)\s*[=:]")

ConfigDocument = Dict[str, Dict[str, Any]]


def parse_config(text: str) -> ConfigDocument:
    """
    Parse configuration text into ``{section: {key: value}}``.

    Keys keep their case. Values are typed with :func:`parse_value`.

    Args:
        text: INI formatted string

    Returns:
        Nested dict in file order (empty for blank input)

    Raises:
        ConfigError: If the text is not valid INI; carries the line number
    """
    if not text or not text.strip():
        return {}

    reader = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    reader.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        reader.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("value outside of any section", line=e.lineno) from e
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", line=e.lineno) from e
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key in [{e.section}]", line=e.lineno, field=e.option) from e
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError("malformed line", line=line) from e
    except configparser.Error as e:
        raise ConfigError(str(e)) from e

    lines = locate_keys(text)
    document: ConfigDocument = {}
    for section in reader.sections():
        values: Dict[str, Any] = {}
        for key, raw in reader.items(section, raw=True):
            try:
                values[key] = parse_value(raw)
            except ValueError as e:
                raise ConfigError(str(e), line=lines.get((section, key)), field=key) from e
        document[section] = values
    return document


def locate_keys(text: str) -> Dict[Tuple[str, str], int]:
    """
    Map ``(section, key)`` to the 1-based line defining it.

    Args:
        text: INI formatted string

    Returns:
        Line numbers of every key (section headers map to key "")
    """
    locations: Dict[Tuple[str, str], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        header = _SECTION_RE.match(line)
        if header:
            section = header.group(1).strip()
            locations[(section, "")] = number
            continue
        if line[:1].isspace():
            continue
        option = _OPTION_RE.match(line)
        if option:
            locations.setdefault((section, option.group(1).strip()), number)
    return locations


def _split_list(value: str) -> List[str]:
    """Split on commas outside double quotes; one trailing comma is allowed."""
    items = []
    current = ""
    in_quotes = False
    escape_next = False

    for char in value:
        if escape_next:
            current += char
            escape_next = False
            continue
        if char == "\\" and in_quotes:
            current += char
            escape_next = True
            continue
        if char == '"':
            in_quotes = not in_quotes
        if char == "," and not in_quotes:
            items.append(current.strip())
            current = ""
            continue
        current += char

    if in_quotes:
        raise ValueError(f"unterminated quote in '{value}'")
    if current.strip() or not items:
        items.append(current.strip())
    return items


def _unquote(value: str) -> str:
    body = value[1:-1]
    out = ""
    escape_next = False
    for char in body:
        if escape_next:
            out += char
            escape_next = False
        elif char == "\\":
            escape_next = True
        else:
            out += char
    return out


def _has_unquoted_comma(value: str) -> bool:
    in_quotes = False
    previous = ""
    for char in value:
        if char == '"' and previous != "\\":
            in_quotes = not in_quotes
        elif char == "," and not in_quotes:
            return True
        previous = char
    return False


def parse_value(value: str) -> Any:
    """
    Parse a single value, inferring its type from the text.

    Recognized, in order: comma lists, quoted strings, null/none, true/false,
    integers, floats (scientific notation, inf, nan), complex literals such as
    ``0.1+0.2j``; anything else is returned as a string.

    Args:
        value: Raw value text

    Returns:
        Parsed value (list, str, None, bool, int, float or complex)

    Raises:
        ValueError: For an unterminated quoted string
    """
    value = value.strip()
    if _has_unquoted_comma(value):
        if value == ",":
            return []
        return [parse_value(item) for item in _split_list(value)]

    if not value:
        return ""

    if len(value) >= 2 and value[0] == '"' and value[-1] == '"':
        return _unquote(value)
    if value.startswith('"'):
        raise ValueError(f"unterminated quote in '{value}'")

    lowered = value.lower()
    if lowered in ("null", "none"):
        return None
    if lowered == "true":
        return True
    if lowered == "false":
        return False

    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    if lowered.endswith("j"):
        try:
            return complex(value.strip("()"))
        except ValueError:
            pass

    return value
