"""Dot-path access to nested parameter dictionaries.

Model descriptions nest as ``{"drive": {...}, "channels": {label: {...}}}``; sweeps and
``--set`` overrides address their leaves as ``drive.delta`` or ``channels.hot.rate``.
"""

from typing import Any, Dict, Iterator, Tuple

DEFAULT_SEPARATOR = "."


def _leaves(node: Dict[str, Any], path: Tuple[str, ...], max_depth: int) -> Iterator[Tuple]:
    for key, value in node.items():
        here = path + (str(key),)
        if isinstance(value, dict) and value and len(here) < max_depth:
            yield from _leaves(value, here, max_depth)
        else:
            yield here, value


def flatten_object(
    obj: Dict[str, Any], separator: str = DEFAULT_SEPARATOR, max_depth: int = 5
) -> Dict[str, Any]:
    """
    Flatten a nested parameter dict into a single level keyed by dot paths.

    Empty dicts, lists and anything nested deeper than ``max_depth`` keys stay leaves.

    Example:
        {"drive": {"omega_d": 1e4}, "channels": {"hot": {"rate": 0.5}}}
        becomes
        {"drive.omega_d": 1e4, "channels.hot.rate": 0.5}
    """
    return {separator.join(path): value for path, value in _leaves(obj, (), max_depth)}


def unflatten_object(obj: Dict[str, Any], separator: str = DEFAULT_SEPARATOR) -> Dict[str, Any]:
    """
    Rebuild the nested dict from dot paths.

    Raises:
        KeyError: If a path uses an existing leaf as a branch
    """
    result: Dict[str, Any] = {}
    for key, value in obj.items():
        *branches, leaf = key.split(separator)
        node = result
        for depth, branch in enumerate(branches):
            child = node.setdefault(branch, {})
            if not isinstance(child, dict):
                prefix = separator.join(branches[: depth + 1])
                raise KeyError(f"'{key}' descends into leaf '{prefix}'")
            node = child
        node[leaf] = value
    return result
