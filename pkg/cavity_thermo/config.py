"""
Run configuration: INI documents to model, solver, sweep and evolve settings.

A configuration starts either from a preset (``[model] preset = kerr``) or
from a full description, and every section overrides what came before::

    [model]
    preset = kerr
    n_max = 40

    [drive]
    amplitude = 1.0
    delta = 0.5

    [channel cavity]
    occupation = 0.5

    [sweep]
    parameter = drive.delta
    start = -5
    stop = 5
    count = 101
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from .errors import ConfigError, ModelError
from .io import read_text
from .models import (
    PRESETS,
    ChannelKind,
    IntraVariant,
    ModelSpec,
    model_from_dict,
    model_to_dict,
    preset,
    scale_units,
)
from .parser import ConfigDocument, locate_keys, parse_config
from .schema import ConfigSchema, Field, FieldType, Schema
from .serializer import stringify_config
from .solver import SolverOptions, SteadyStateMethod

logger = logging.getLogger(__name__)

CHANNEL_PREFIX = "channel "
INITIAL_STATES = ("vacuum", "thermal", "coherent", "file")

_POSITIVE = {"min_value": 0.0}
_DOT_PATH = r"^[A-Za-z_]\w*(\.[\w-]+)*$"

CONFIG_SCHEMA = ConfigSchema(
    [
        Schema(
            "model",
            [
                Field("preset", FieldType.STRING, enum=list(PRESETS)),
                Field("omega_cavity", FieldType.FLOAT, min_value=0.0),
                Field("n_max", FieldType.INTEGER, min_value=2),
            ],
        ),
        Schema(
            "drive",
            [
                Field("amplitude", FieldType.COMPLEX),
                Field("omega_d", FieldType.FLOAT, min_value=0.0),
                Field("delta", FieldType.FLOAT),
                Field("channel", FieldType.STRING, nullable=True),
            ],
        ),
        Schema(
            "intra",
            [
                Field(
                    "variant",
                    FieldType.STRING,
                    nullable=True,
                    enum=[v.value for v in IntraVariant],
                ),
                Field("K", FieldType.FLOAT),
                Field("omega_q", FieldType.FLOAT, **_POSITIVE),
                Field("g", FieldType.FLOAT),
                Field("omega_2", FieldType.FLOAT, **_POSITIVE),
                Field("omega_3", FieldType.FLOAT, **_POSITIVE),
            ],
        ),
        Schema(
            CHANNEL_PREFIX + "*",
            [
                Field("kind", FieldType.STRING, enum=[k.value for k in ChannelKind]),
                Field("rate", FieldType.FLOAT, **_POSITIVE),
                Field("occupation", FieldType.FLOAT, **_POSITIVE),
                Field("jumps", FieldType.LIST, item_type=FieldType.STRING),
                Field("reference_frequency", FieldType.FLOAT, nullable=True, **_POSITIVE),
                Field("input_amplitude", FieldType.COMPLEX),
                Field("temperature_occupation", FieldType.FLOAT, nullable=True, **_POSITIVE),
            ],
        ),
        Schema(
            "solver",
            [
                Field("method", FieldType.STRING, enum=[m.value for m in SteadyStateMethod]),
                Field("tol", FieldType.FLOAT, min_value=0.0),
                Field("dense_limit", FieldType.INTEGER, min_value=1),
                Field("max_dim", FieldType.INTEGER, min_value=1),
                Field("max_steps", FieldType.INTEGER, min_value=1),
            ],
        ),
        Schema(
            "sweep",
            [
                Field("parameter", FieldType.STRING, required=True, pattern=_DOT_PATH),
                Field("values", FieldType.LIST, item_type=FieldType.FLOAT),
                Field("start", FieldType.FLOAT),
                Field("stop", FieldType.FLOAT),
                Field("count", FieldType.INTEGER, min_value=1),
                Field("series", FieldType.STRING, pattern=_DOT_PATH),
                Field("series_values", FieldType.LIST, item_type=FieldType.FLOAT),
                Field("outputs", FieldType.LIST, item_type=FieldType.STRING),
                Field("output", FieldType.STRING),
            ],
        ),
        Schema(
            "units",
            [
                Field(
                    "scale",
                    FieldType.FLOAT,
                    required=True,
                    validator=lambda v: 0.0 < v < math.inf,
                )
            ],
        ),
        Schema(
            "evolve",
            [
                Field("initial", FieldType.STRING, enum=list(INITIAL_STATES)),
                Field("alpha", FieldType.COMPLEX),
                Field("state_file", FieldType.STRING),
                Field("t_end", FieldType.FLOAT, min_value=0.0),
                Field("samples", FieldType.INTEGER, min_value=2),
                Field("max_step", FieldType.FLOAT, nullable=True, min_value=0.0),
            ],
        ),
    ]
)


@dataclass
class SweepConfig:
    """One swept parameter, optionally repeated for each value of a series parameter."""

    parameter: str
    values: List[float]
    series: Optional[str] = None
    series_values: List[float] = field(default_factory=list)
    outputs: Optional[List[str]] = None
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.values:
            raise ConfigError("sweep needs at least one value", field="values")
        if self.series is not None and not self.series_values:
            raise ConfigError("series given without series_values", field="series_values")

    @classmethod
    def linear(
        cls, parameter: str, start: float, stop: float, count: int, **kwargs: Any
    ) -> "SweepConfig":
        """Evenly spaced values from ``start`` to ``stop`` inclusive."""
        return cls(parameter, [float(v) for v in np.linspace(start, stop, count)], **kwargs)


@dataclass
class EvolveConfig:
    """Transient run settings."""

    initial: str = "vacuum"
    alpha: complex = 0j
    state_file: Optional[str] = None
    t_end: float = 10.0
    samples: int = 101
    max_step: Optional[float] = None

    def __post_init__(self) -> None:
        if self.initial not in INITIAL_STATES:
            raise ConfigError(f"unknown initial state '{self.initial}'", field="initial")
        if self.initial == "file" and not self.state_file:
            raise ConfigError("initial = file needs state_file", field="state_file")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2", field="samples")

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.samples)


@dataclass
class RunConfig:
    """Everything a command needs, resolved from defaults, presets and files."""

    model: ModelSpec
    solver: SolverOptions = field(default_factory=SolverOptions)
    sweep: Optional[SweepConfig] = None
    evolve: Optional[EvolveConfig] = None
    scale: float = 1.0


def _base_description(doc: ConfigDocument) -> Dict[str, Any]:
    name = doc.get("model", {}).get("preset")
    if name is None:
        return {"drive": {}, "intra": {}, "channels": {}}
    return model_to_dict(preset(name))


def _model_description(doc: ConfigDocument) -> Dict[str, Any]:
    description = _base_description(doc)
    for key in ("omega_cavity", "n_max"):
        if key in doc.get("model", {}):
            description[key] = doc["model"][key]

    drive = dict(doc.get("drive", {}))
    delta = drive.pop("delta", None)
    description["drive"].update(drive)
    if delta is not None:
        if "omega_d" in drive:
            raise ConfigError("give either omega_d or delta in [drive], not both", field="delta")
        if "omega_cavity" not in description:
            raise ConfigError("delta needs omega_cavity", field="delta")
        description["drive"]["omega_d"] = description["omega_cavity"] - delta

    if "intra" in doc:
        intra = dict(doc["intra"])
        if "variant" in intra and intra["variant"] is None:
            intra["variant"] = IntraVariant.NONE.value
        if "variant" in intra and intra["variant"] != description["intra"].get("variant"):
            description["intra"] = {}
        description["intra"].update(intra)

    for section, values in doc.items():
        if section.startswith(CHANNEL_PREFIX):
            label = section[len(CHANNEL_PREFIX):].strip()
            if not label:
                raise ConfigError(f"channel section [{section}] has no label")
            description["channels"].setdefault(label, {}).update(values)
    return description


def _model_from_document(doc: ConfigDocument, lines: Mapping[Tuple[str, str], int]) -> ModelSpec:
    description = _model_description(doc)
    try:
        return model_from_dict(description)
    except ModelError as e:
        raise ConfigError(f"invalid model: {e}", line=lines.get(("model", ""))) from e


def _sweep_from_section(values: Mapping[str, Any]) -> SweepConfig:
    extras = {k: values[k] for k in ("series", "series_values", "outputs", "output") if k in values}
    if "values" in values:
        if any(k in values for k in ("start", "stop", "count")):
            raise ConfigError("give either values or start/stop/count in [sweep]", field="values")
        return SweepConfig(values["parameter"], values["values"], **extras)
    missing = [k for k in ("start", "stop", "count") if k not in values]
    if missing:
        raise ConfigError("sweep needs values or start/stop/count", field=missing[0])
    return SweepConfig.linear(
        values["parameter"], values["start"], values["stop"], values["count"], **extras
    )


def config_from_text(text: str) -> RunConfig:
    """
    Build a run configuration from INI text.

    Args:
        text: Configuration text

    Returns:
        Resolved RunConfig (model scaled by ``[units] scale``)

    Raises:
        ConfigError: On syntax errors, unknown keys or an invalid model
    """
    lines = locate_keys(text)
    doc = CONFIG_SCHEMA.validate(parse_config(text), lines)
    if "model" not in doc and not any(s.startswith(CHANNEL_PREFIX) for s in doc):
        raise ConfigError("configuration needs a [model] section")

    model = _model_from_document(doc, lines)
    scale = doc.get("units", {}).get("scale", 1.0)
    if scale != 1.0:
        model = scale_units(model, scale)

    solver = SolverOptions(**doc.get("solver", {}))
    sweep = _sweep_from_section(doc["sweep"]) if "sweep" in doc else None
    evolve = EvolveConfig(**doc["evolve"]) if "evolve" in doc else None
    logger.debug("Loaded configuration for a model of dimension %d", model.dim)
    return RunConfig(model=model, solver=solver, sweep=sweep, evolve=evolve, scale=scale)


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and resolve a configuration file."""
    return config_from_text(read_text(path))


def config_document(model: ModelSpec, solver: Optional[SolverOptions] = None) -> ConfigDocument:
    """
    Describe a model (and solver options) as a configuration document.

    ``config_from_text(stringify_config(config_document(m))).model == m``.
    """
    description = model_to_dict(model)
    doc: ConfigDocument = {
        "model": {"omega_cavity": description["omega_cavity"], "n_max": description["n_max"]},
        "drive": description["drive"],
        "intra": description["intra"],
    }
    for label, values in description["channels"].items():
        doc[CHANNEL_PREFIX + label] = values
    if solver is not None:
        doc["solver"] = {
            "method": solver.method.value,
            "tol": solver.tol,
            "dense_limit": solver.dense_limit,
            "max_dim": solver.max_dim,
            "max_steps": solver.max_steps,
        }
    return doc


def config_to_text(model: ModelSpec, solver: Optional[SolverOptions] = None) -> str:
    return stringify_config(config_document(model, solver))
