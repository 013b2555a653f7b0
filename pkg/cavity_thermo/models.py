"""Model parameters and operator builders for driven cavity systems.

A :class:`ModelSpec` describes one cavity mode (truncated at ``n_max`` Fock
levels), a coherent drive at ``omega_d``, an optional intra-cavity system and
any number of thermal bath channels. Everything here is expressed in the frame
rotating at the drive frequency.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from .errors import ModelError
from .linalg import (
    DensityMatrix,
    Operator,
    SuperOperator,
    dissipator_super,
    fock_annihilation,
    identity,
    is_hermitian,
    projector,
)
from .paths import flatten_object, unflatten_object

logger = logging.getLogger(__name__)

TAIL_WARN = 1e-6
OPERATOR_CACHE_SIZE = 8


class ChannelKind(str, Enum):
    """Where a bath couples."""

    CAVITY_ACCESSIBLE = "cavity-accessible"
    CAVITY_INACCESSIBLE = "cavity-inaccessible"
    INTRA = "intra"


class IntraVariant(str, Enum):
    """Intra-cavity system attached to the mode."""

    NONE = "none"
    KERR = "kerr"
    TLS = "tls"
    MASER = "maser"


# Jump template -> intra variants it is valid for (None: cavity channels)
JUMP_TEMPLATES: Dict[str, Optional[Tuple[IntraVariant, ...]]] = {
    "cavity": None,
    "tls": (IntraVariant.TLS,),
    "maser-hot": (IntraVariant.MASER,),
    "maser-cold": (IntraVariant.MASER,),
}

PRESETS = ("empty", "kerr", "tls", "maser")


@dataclass(frozen=True)
class BathChannel:
    """
    One thermal bath and the jump pair(s) it drives.

    ``temperature_occupation`` decouples the occupation used for the bath
    temperature from the one in the dissipator. It exists to inject faults.
    """

    label: str
    kind: ChannelKind
    rate: float
    occupation: float
    jumps: Tuple[str, ...] = ("cavity",)
    reference_frequency: Optional[float] = None
    input_amplitude: complex = 0j
    temperature_occupation: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        if isinstance(self.jumps, str):
            object.__setattr__(self, "jumps", (self.jumps,))
        else:
            object.__setattr__(self, "jumps", tuple(self.jumps))
        object.__setattr__(self, "input_amplitude", complex(self.input_amplitude))

    @property
    def is_cavity(self) -> bool:
        return self.kind != ChannelKind.INTRA


@dataclass(frozen=True)
class DriveSpec:
    """Coherent input amplitude ``f`` (co-rotating) at frequency ``omega_d``."""

    amplitude_f: complex
    omega_d: float
    channel: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude_f", complex(self.amplitude_f))


@dataclass(frozen=True)
class IntraSystem:
    """Intra-cavity system. Unused parameters stay at zero."""

    variant: IntraVariant = IntraVariant.NONE
    K: float = 0.0
    omega_q: float = 0.0
    g: float = 0.0
    omega_2: float = 0.0
    omega_3: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", IntraVariant(self.variant))

    @property
    def dim(self) -> int:
        return {IntraVariant.TLS: 2, IntraVariant.MASER: 3}.get(self.variant, 1)


@dataclass(frozen=True)
class ModelSpec:
    """Complete, hashable parameterization of a driven cavity model."""

    omega_cavity: float
    n_max: int
    drive: DriveSpec
    intra: IntraSystem = field(default_factory=IntraSystem)
    channels: Tuple[BathChannel, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "channels", tuple(self.channels))
        _validate(self)

    @property
    def dim(self) -> int:
        return self.n_max * self.intra.dim

    @property
    def delta(self) -> float:
        """Cavity detuning from the drive."""
        return self.omega_cavity - self.drive.omega_d

    @property
    def accessible_channels(self) -> List[BathChannel]:
        return [c for c in self.channels if c.kind == ChannelKind.CAVITY_ACCESSIBLE]

    @property
    def cavity_channels(self) -> List[BathChannel]:
        return [c for c in self.channels if c.is_cavity]

    @property
    def intra_channels(self) -> List[BathChannel]:
        return [c for c in self.channels if c.kind == ChannelKind.INTRA]

    @property
    def drive_channel(self) -> BathChannel:
        """Cavity channel the drive amplitude enters through."""
        if self.drive.channel is None:
            return self.accessible_channels[0]
        return self.channel(self.drive.channel)

    @property
    def kappa_total(self) -> float:
        return sum(c.rate for c in self.cavity_channels)

    def channel(self, label: str) -> BathChannel:
        for candidate in self.channels:
            if candidate.label == label:
                return candidate
        raise ModelError(f"Unknown channel '{label}'")

    def input_amplitude(self, channel: BathChannel) -> complex:
        """Coherent input amplitude entering through a cavity channel."""
        if not channel.is_cavity:
            return 0j
        if channel.label == self.drive_channel.label:
            return self.drive.amplitude_f
        return channel.input_amplitude


def _finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ModelError(f"{name} must be finite, got {value!r}")


def _validate(model: ModelSpec) -> None:
    _finite("omega_cavity", model.omega_cavity)
    if model.omega_cavity <= 0:
        raise ModelError("omega_cavity must be positive")
    if int(model.n_max) != model.n_max or model.n_max < 2:
        raise ModelError(f"n_max must be an integer >= 2, got {model.n_max!r}")
    _finite("drive.omega_d", model.drive.omega_d)
    if model.drive.omega_d <= 0:
        raise ModelError("drive.omega_d must be positive")
    f = model.drive.amplitude_f
    _finite("drive.amplitude", abs(f))

    intra = model.intra
    for name in ("K", "omega_q", "g", "omega_2", "omega_3"):
        _finite(f"intra.{name}", getattr(intra, name))
    if intra.variant == IntraVariant.MASER and not intra.omega_3 > intra.omega_2:
        raise ModelError("maser requires omega_3 > omega_2")

    labels = [c.label for c in model.channels]
    if len(set(labels)) != len(labels):
        raise ModelError(f"channel labels must be unique: {labels}")
    if not any(c.kind == ChannelKind.CAVITY_ACCESSIBLE for c in model.channels):
        raise ModelError("at least one cavity-accessible channel is required")

    for channel in model.channels:
        where = f"channel '{channel.label}'"
        _finite(f"{where} rate", channel.rate)
        _finite(f"{where} occupation", channel.occupation)
        _finite(f"{where} input amplitude", abs(channel.input_amplitude))
        if channel.rate <= 0:
            raise ModelError(f"{where}: rate must be positive")
        if channel.occupation < 0:
            raise ModelError(f"{where}: occupation must be nonnegative")
        if channel.temperature_occupation is not None and channel.temperature_occupation < 0:
            raise ModelError(f"{where}: temperature occupation must be nonnegative")
        if channel.reference_frequency is not None and not channel.reference_frequency > 0:
            raise ModelError(f"{where}: reference frequency must be positive")
        if not channel.jumps:
            raise ModelError(f"{where}: no jump operators")
        for template in channel.jumps:
            if template not in JUMP_TEMPLATES:
                raise ModelError(f"{where}: unknown jump template '{template}'")
            variants = JUMP_TEMPLATES[template]
            if channel.is_cavity != (variants is None):
                raise ModelError(
                    f"{where}: template '{template}' does not fit kind {channel.kind.value}"
                )
            if variants is not None and intra.variant not in variants:
                raise ModelError(
                    f"{where}: template '{template}' needs intra variant "
                    f"{'/'.join(v.value for v in variants)}"
                )
        reference_frequency(model, channel)

    if model.drive.channel is not None:
        target = model.channel(model.drive.channel)
        if target.kind != ChannelKind.CAVITY_ACCESSIBLE:
            raise ModelError(f"drive channel '{target.label}' is not cavity-accessible")


def _template_frequency(model: ModelSpec, template: str) -> float:
    if template in ("cavity", "tls"):
        return model.drive.omega_d
    if template == "maser-hot":
        return model.intra.omega_3
    return model.intra.omega_3 - model.drive.omega_d


def reference_frequency(model: ModelSpec, channel: BathChannel) -> float:
    """
    Frequency entering the occupation/temperature map of a channel.

    Pinned values win; otherwise the jump template decides (drive frequency
    for cavity and TLS jumps, omega_3 for the hot maser transition,
    omega_3 - omega_d for the cold one).

    Raises:
        ModelError: If templates disagree or the frequency is not positive
    """
    if channel.reference_frequency is not None:
        return channel.reference_frequency
    freqs = {_template_frequency(model, t) for t in channel.jumps}
    if len(freqs) != 1:
        raise ModelError(f"channel '{channel.label}': jump templates disagree on frequency")
    value = freqs.pop()
    if not value > 0:
        raise ModelError(f"channel '{channel.label}': reference frequency {value} is not positive")
    return value


def bose_occupation(temperature: float, omega: float) -> float:
    """Bose-Einstein occupation ``1/(exp(omega/T) - 1)``; zero at T = 0."""
    if temperature < 0 or omega <= 0:
        raise ModelError("temperature must be nonnegative and omega positive")
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(omega / temperature)


def occupation_to_temperature(n: float, omega: float) -> float:
    """
    Invert the Bose-Einstein map: ``T = omega / ln(1 + 1/n)``.

    Args:
        n: Thermal occupation (0 flags a zero-temperature bath)
        omega: Reference frequency

    Returns:
        Temperature in energy units; 0.0 for n == 0

    Raises:
        ModelError: For negative occupation or nonpositive frequency
    """
    if n < 0 or omega <= 0:
        raise ModelError(f"cannot map occupation {n} at frequency {omega} to a temperature")
    if n == 0:
        return 0.0
    return omega / math.log1p(1.0 / n)


def channel_temperature(model: ModelSpec, channel: BathChannel) -> float:
    occupation = (
        channel.occupation
        if channel.temperature_occupation is None
        else channel.temperature_occupation
    )
    return occupation_to_temperature(occupation, reference_frequency(model, channel))


@dataclass(frozen=True, eq=False)
class ModelOperators:
    """Operators of one model on the full cavity (x) intra space."""

    a: Operator
    n: Operator
    top_projector: Operator
    h_rot: Operator
    h_td: Operator
    h_td_intra: Operator
    h_td_intra_local: Operator
    jumps: Dict[str, Tuple[Operator, Operator]]


def _intra_operators(intra: IntraSystem) -> Dict[str, Operator]:
    if intra.variant == IntraVariant.TLS:
        lower = projector(0, 1, 2)
        return {
            "sigma_minus": lower,
            "sigma_plus": lower.conj().T,
            "sigma_z": np.diag([-1.0, 1.0]).astype(complex),
        }
    if intra.variant == IntraVariant.MASER:
        return {f"p{i}{j}": projector(i - 1, j - 1, 3) for i in (1, 2, 3) for j in (1, 2, 3)}
    return {}


@lru_cache(maxsize=OPERATOR_CACHE_SIZE)
def model_operators(model: ModelSpec) -> ModelOperators:
    """
    Build (once per distinct model) every operator the engine needs.

    Logs a warning when the drive is far detuned or a cavity bath's thermal
    tail at ``n_max`` exceeds 1e-6.
    """
    n_fock = model.n_max
    d_intra = model.intra.dim
    i_intra = identity(d_intra)
    i_fock = identity(n_fock)
    a_fock = fock_annihilation(n_fock)

    a = np.kron(a_fock, i_intra)
    # exact integer diagonal; a^dagger a carries sqrt round-off
    n = np.kron(np.diag(np.arange(n_fock, dtype=float)), i_intra).astype(complex)
    top = np.kron(np.diag(np.eye(n_fock)[-1]).astype(complex), i_intra)
    omega_d = model.drive.omega_d

    if abs(model.delta) > 0.1 * omega_d:
        logger.warning(
            "Drive detuning %.4g exceeds 10%% of omega_d=%.4g; rotating-wave treatment is strained",
            model.delta,
            omega_d,
        )
    for channel in model.cavity_channels:
        occ = channel.occupation
        tail = (occ / (occ + 1.0)) ** n_fock
        if tail > TAIL_WARN:
            logger.warning(
                "Channel '%s': thermal tail %.2e at n_max=%d exceeds %.0e",
                channel.label,
                tail,
                n_fock,
                TAIL_WARN,
            )

    ops = _intra_operators(model.intra)
    intra = model.intra
    h_prime = np.zeros((model.dim, model.dim), dtype=complex)
    h_td_local = np.zeros((d_intra, d_intra), dtype=complex)
    if intra.variant == IntraVariant.KERR:
        h_prime = intra.K * (a.conj().T @ a.conj().T @ a @ a)
    elif intra.variant == IntraVariant.TLS:
        sm = np.kron(i_fock, ops["sigma_minus"])
        sp_ = sm.conj().T
        sz = np.kron(i_fock, ops["sigma_z"])
        h_prime = 0.5 * (intra.omega_q - omega_d) * sz + intra.g * (a.conj().T @ sm + a @ sp_)
        h_td_local = omega_d * ops["sigma_plus"] @ ops["sigma_minus"]
    elif intra.variant == IntraVariant.MASER:
        p22 = np.kron(i_fock, ops["p22"])
        p33 = np.kron(i_fock, ops["p33"])
        p21 = np.kron(i_fock, ops["p21"])
        # |3> stays in the lab frame
        coupling = a @ p21
        h_prime = (
            (intra.omega_2 - omega_d) * p22
            + intra.omega_3 * p33
            + intra.g * (coupling + coupling.conj().T)
        )
        h_td_local = omega_d * ops["p22"] + intra.omega_3 * ops["p33"]

    h_drive = np.zeros_like(h_prime)
    for channel in model.cavity_channels:
        f = model.input_amplitude(channel)
        if f != 0:
            h_drive = h_drive + 1j * math.sqrt(channel.rate) * (np.conj(f) * a - f * a.conj().T)

    h_rot = model.delta * n + h_prime + h_drive
    h_td_intra = np.kron(i_fock, h_td_local)
    h_td = omega_d * n + h_td_intra

    for name, op in (("rotating-frame Hamiltonian", h_rot), ("thermodynamic Hamiltonian", h_td)):
        if not np.all(np.isfinite(op)):
            raise ModelError(f"{name} has non-finite entries")
        if not is_hermitian(op):
            raise ModelError(f"{name} is not Hermitian")

    jumps: Dict[str, Tuple[Operator, Operator]] = {"cavity": (a, a.conj().T)}
    if intra.variant == IntraVariant.TLS:
        lower = np.kron(i_fock, ops["sigma_minus"])
        jumps["tls"] = (lower, lower.conj().T)
    elif intra.variant == IntraVariant.MASER:
        hot = np.kron(i_fock, ops["p13"])
        cold = np.kron(i_fock, ops["p23"])
        jumps["maser-hot"] = (hot, hot.conj().T)
        jumps["maser-cold"] = (cold, cold.conj().T)

    for op in (a, n, top, h_rot, h_td, h_td_intra):
        op.setflags(write=False)
    return ModelOperators(
        a=a,
        n=n,
        top_projector=top,
        h_rot=h_rot,
        h_td=h_td,
        h_td_intra=h_td_intra,
        h_td_intra_local=h_td_local,
        jumps=jumps,
    )


def build_hamiltonian_rotating(model: ModelSpec) -> Operator:
    """
    Hamiltonian in the frame rotating at the drive frequency.

    ``H = Delta n + H' + i sum_j sqrt(kappa_j)(f_j* a - f_j a^dagger)`` where the
    sum runs over every cavity channel carrying a coherent input.
    """
    return np.array(model_operators(model).h_rot)


def build_thermo_hamiltonian(model: ModelSpec) -> Operator:
    """Thermodynamic Hamiltonian; its intra part commutes with ``a``."""
    return np.array(model_operators(model).h_td)


def build_channels(model: ModelSpec) -> List[Tuple[BathChannel, SuperOperator]]:
    """
    Dissipator of each bath channel.

    Each jump pair contributes ``rate*occ*D[raise] + rate*(occ+1)*D[lower]``.

    Raises:
        ModelError: If an intra jump does not commute with the cavity field
    """
    ops = model_operators(model)
    parts: List[Tuple[BathChannel, SuperOperator]] = []
    for channel in model.channels:
        total = SuperOperator.zero(model.dim)
        for template in channel.jumps:
            lower, raise_ = ops.jumps[template]
            if not channel.is_cavity:
                leak = max(
                    float(np.max(np.abs(lower @ ops.a - ops.a @ lower))),
                    float(np.max(np.abs(lower @ ops.a.conj().T - ops.a.conj().T @ lower))),
                )
                if leak > 1e-12:
                    raise ModelError(f"channel '{channel.label}': jump does not commute with a")
            total = total + (channel.rate * (channel.occupation + 1.0)) * dissipator_super(lower)
            if channel.occupation > 0:
                total = total + (channel.rate * channel.occupation) * dissipator_super(raise_)
        parts.append((channel, total))
    return parts


@dataclass(frozen=True, eq=False)
class ReferenceState:
    """A fixed-point state together with its exact logarithm (None when singular)."""

    state: DensityMatrix
    log: Optional[Operator]


def _thermal_from_energies(
    energies: np.ndarray, temperature: float
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Populations and log-populations of a Gibbs distribution."""
    if temperature == 0:
        atol = 1e-12 * max(1.0, float(np.max(np.abs(energies))))
        ground = np.isclose(energies, energies.min(), rtol=0, atol=atol)
        probs = ground / ground.sum()
        return probs.astype(float), None
    scaled = -energies / temperature
    logs = scaled - logsumexp(scaled)
    return np.exp(logs), logs


def gibbs_state(model: ModelSpec, temperature: float) -> ReferenceState:
    """
    Truncated Gibbs state ``exp(-H_TD/T)/Z`` with its logarithm.

    At zero temperature the ground-state projector is returned and ``log`` is None.
    """
    h_td = model_operators(model).h_td
    energies, vectors = np.linalg.eigh(h_td)
    probs, logs = _thermal_from_energies(energies, temperature)
    state = DensityMatrix.from_array((vectors * probs) @ vectors.conj().T)
    log = None if logs is None else (vectors * logs) @ vectors.conj().T
    return ReferenceState(state, log)


def displaced_gibbs_state(model: ModelSpec, temperature: float, alpha: complex) -> ReferenceState:
    """
    Cavity Gibbs state displaced by ``alpha`` (times the intra Gibbs factor).

    The displacement is exponentiated on the truncated Fock space, so the state
    is the fixed point of the shifted dissipator only up to edge terms.
    """
    omega_d = model.drive.omega_d
    a_fock = fock_annihilation(model.n_max)
    disp = scipy.linalg.expm(alpha * a_fock.conj().T - np.conj(alpha) * a_fock)

    fock_energies = omega_d * np.arange(model.n_max, dtype=float)
    cav_probs, cav_logs = _thermal_from_energies(fock_energies, temperature)
    h_local = model_operators(model).h_td_intra_local
    intra_energies, intra_vectors = np.linalg.eigh(h_local)
    intra_probs, intra_logs = _thermal_from_energies(intra_energies, temperature)

    cav_state = (disp * cav_probs) @ disp.conj().T
    intra_state = (intra_vectors * intra_probs) @ intra_vectors.conj().T
    state = DensityMatrix.from_array(np.kron(cav_state, intra_state))
    if cav_logs is None or intra_logs is None:
        return ReferenceState(state, None)
    cav_log = (disp * cav_logs) @ disp.conj().T
    intra_log = (intra_vectors * intra_logs) @ intra_vectors.conj().T
    log = np.kron(cav_log, identity(model.intra.dim)) + np.kron(identity(model.n_max), intra_log)
    return ReferenceState(state, log)


# ---------------------------------------------------------------------------
# Dict form, overrides and presets
# ---------------------------------------------------------------------------


def model_to_dict(model: ModelSpec) -> Dict[str, Any]:
    """Nested plain-dict form; channels are keyed by label in model order."""
    intra = model.intra
    intra_dict: Dict[str, Any] = {"variant": intra.variant.value}
    if intra.variant == IntraVariant.KERR:
        intra_dict["K"] = intra.K
    elif intra.variant == IntraVariant.TLS:
        intra_dict.update(omega_q=intra.omega_q, g=intra.g)
    elif intra.variant == IntraVariant.MASER:
        intra_dict.update(omega_2=intra.omega_2, omega_3=intra.omega_3, g=intra.g)

    channels: Dict[str, Any] = {}
    for c in model.channels:
        entry: Dict[str, Any] = {
            "kind": c.kind.value,
            "rate": c.rate,
            "occupation": c.occupation,
            "jumps": list(c.jumps),
        }
        if c.reference_frequency is not None:
            entry["reference_frequency"] = c.reference_frequency
        if c.input_amplitude != 0:
            entry["input_amplitude"] = c.input_amplitude
        if c.temperature_occupation is not None:
            entry["temperature_occupation"] = c.temperature_occupation
        channels[c.label] = entry

    drive: Dict[str, Any] = {"amplitude": model.drive.amplitude_f, "omega_d": model.drive.omega_d}
    if model.drive.channel is not None:
        drive["channel"] = model.drive.channel
    return {
        "omega_cavity": model.omega_cavity,
        "n_max": model.n_max,
        "drive": drive,
        "intra": intra_dict,
        "channels": channels,
    }


def model_from_dict(data: Mapping[str, Any]) -> ModelSpec:
    """
    Inverse of :func:`model_to_dict`.

    Raises:
        ModelError: On missing keys or invalid values
    """
    try:
        drive = data["drive"]
        intra = dict(data.get("intra", {}))
        variant = intra.pop("variant", "none")
        channels = [
            BathChannel(
                label=label,
                kind=ChannelKind(entry.get("kind", ChannelKind.CAVITY_ACCESSIBLE.value)),
                rate=float(entry["rate"]),
                occupation=float(entry.get("occupation", 0.0)),
                jumps=tuple(entry.get("jumps", ("cavity",))),
                reference_frequency=_opt_float(entry.get("reference_frequency")),
                input_amplitude=complex(entry.get("input_amplitude", 0j)),
                temperature_occupation=_opt_float(entry.get("temperature_occupation")),
            )
            for label, entry in data.get("channels", {}).items()
        ]
        return ModelSpec(
            omega_cavity=float(data["omega_cavity"]),
            n_max=int(data["n_max"]),
            drive=DriveSpec(
                amplitude_f=complex(drive.get("amplitude", 0j)),
                omega_d=float(drive["omega_d"]),
                channel=drive.get("channel"),
            ),
            intra=IntraSystem(
                variant=IntraVariant(variant), **{k: float(v) for k, v in intra.items()}
            ),
            channels=tuple(channels),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"Invalid model description: {e}") from e


def _opt_float(value: Any) -> Optional[float]:
    return None if value is None else float(value)


def with_parameter(model: ModelSpec, path: str, value: Any) -> ModelSpec:
    """
    Return a copy of ``model`` with one dot-path parameter replaced.

    Besides every key of :func:`model_to_dict` (``drive.omega_d``,
    ``intra.K``, ``channels.hot.occupation`` ...), two derived paths are
    understood: ``drive.delta`` sets ``omega_d = omega_cavity - delta`` and
    ``channels.<label>.T`` sets the occupation from a temperature through the
    channel's reference frequency.

    Raises:
        ModelError: If the path does not resolve
    """
    if path == "drive.delta":
        return replace(model, drive=replace(model.drive, omega_d=model.omega_cavity - float(value)))
    parts = path.split(".")
    if len(parts) == 3 and parts[0] == "channels" and parts[2] == "T":
        channel = model.channel(parts[1])
        occupation = bose_occupation(float(value), reference_frequency(model, channel))
        return with_parameter(model, f"channels.{parts[1]}.occupation", occupation)

    flat = flatten_object(model_to_dict(model), max_depth=3)
    if path not in flat and not _is_optional_key(path):
        raise ModelError(f"Unknown parameter path '{path}'")
    flat[path] = value
    try:
        nested = unflatten_object(flat)
    except KeyError as e:
        raise ModelError(f"Parameter path '{path}' does not resolve: {e}") from e
    return model_from_dict(nested)


_OPTIONAL_LEAVES = {
    "drive.channel",
    "intra.K",
    "intra.omega_q",
    "intra.g",
    "intra.omega_2",
    "intra.omega_3",
}
_OPTIONAL_CHANNEL_LEAVES = {"reference_frequency", "input_amplitude", "temperature_occupation"}


def _is_optional_key(path: str) -> bool:
    if path in _OPTIONAL_LEAVES:
        return True
    parts = path.split(".")
    return len(parts) == 3 and parts[0] == "channels" and parts[2] in _OPTIONAL_CHANNEL_LEAVES


def preset(name: str, overrides: Optional[Mapping[str, Any]] = None) -> ModelSpec:
    """
    Build one of the reference models in units of the cavity decay rate.

    Presets (``kappa = 1``, ``Omega = 1e4``, resonant drive unless overridden):

    - ``empty``: bare cavity, f = 0.1, n_c = 0.5, n_max = 40.
    - ``kerr``: K = 0.05, f = 1, n_c = 0.5, n_max = 30.
    - ``tls``: two-level system with omega_q = Omega, g = 0.1, gamma = 0.05,
      f = 0.01, n_c = n_q = 0.05, n_max = 20. The qubit splitting is exposed
      separately from the cavity frequency.
    - ``maser``: three-level maser with g = 0.7, f = 0.1, omega_2 = Omega,
      omega_3 = 3 Omega, gamma_H = 0.5, gamma_C = 100, n_c = 4.54,
      n_C = 0.007, hot bath at T_H = 1e5, n_max = 60. The drive frequency
      is not given for this model and defaults to resonance.

    Args:
        name: Preset name
        overrides: Dot-path parameter overrides (see :func:`with_parameter`),
            applied in order

    Raises:
        ModelError: Unknown preset or invalid override
    """
    omega = 1e4

    def cavity(occupation: float) -> BathChannel:
        return BathChannel("cavity", ChannelKind.CAVITY_ACCESSIBLE, 1.0, occupation)

    if name == "empty":
        model = ModelSpec(omega, 40, DriveSpec(0.1, omega), IntraSystem(), (cavity(0.5),))
    elif name == "kerr":
        kerr = IntraSystem(IntraVariant.KERR, K=0.05)
        model = ModelSpec(omega, 30, DriveSpec(1.0, omega), kerr, (cavity(0.5),))
    elif name == "tls":
        model = ModelSpec(
            omega,
            20,
            DriveSpec(0.01, omega),
            IntraSystem(IntraVariant.TLS, omega_q=omega, g=0.1),
            (cavity(0.05), BathChannel("tls", ChannelKind.INTRA, 0.05, 0.05, ("tls",))),
        )
    elif name == "maser":
        n_hot = bose_occupation(1e5, 3 * omega)
        model = ModelSpec(
            omega,
            60,
            DriveSpec(0.1, omega),
            IntraSystem(IntraVariant.MASER, g=0.7, omega_2=omega, omega_3=3 * omega),
            (
                cavity(4.54),
                BathChannel("hot", ChannelKind.INTRA, 0.5, n_hot, ("maser-hot",)),
                BathChannel("cold", ChannelKind.INTRA, 100.0, 0.007, ("maser-cold",)),
            ),
        )
    else:
        raise ModelError(f"Unknown preset '{name}' (choose from {', '.join(PRESETS)})")

    for path, value in (overrides or {}).items():
        model = with_parameter(model, path, value)
    return model


def scale_units(model: ModelSpec, scale: float) -> ModelSpec:
    """Multiply every rate and frequency by ``scale`` (amplitudes by its square root)."""
    if not scale > 0:
        raise ModelError("unit scale must be positive")
    root = math.sqrt(scale)
    channels = tuple(
        replace(
            c,
            rate=c.rate * scale,
            reference_frequency=(
                None if c.reference_frequency is None else c.reference_frequency * scale
            ),
            input_amplitude=c.input_amplitude * root,
        )
        for c in model.channels
    )
    intra = model.intra
    return replace(
        model,
        omega_cavity=model.omega_cavity * scale,
        drive=replace(
            model.drive,
            amplitude_f=model.drive.amplitude_f * root,
            omega_d=model.drive.omega_d * scale,
        ),
        intra=replace(
            intra,
            K=intra.K * scale,
            omega_q=intra.omega_q * scale,
            g=intra.g * scale,
            omega_2=intra.omega_2 * scale,
            omega_3=intra.omega_3 * scale,
        ),
        channels=channels,
    )


def fingerprint(model: ModelSpec) -> str:
    """Stable SHA-256 hex digest of the model parameters."""

    def _default(value: Any) -> Any:
        if isinstance(value, complex):
            return [repr(value.real), repr(value.imag)]
        raise TypeError(f"unserializable {type(value).__name__}")

    def _floats(obj: Any) -> Any:
        if isinstance(obj, dict):
            return {k: _floats(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [_floats(v) for v in obj]
        if isinstance(obj, float):
            return repr(obj)
        return obj

    payload = json.dumps(_floats(model_to_dict(model)), sort_keys=True, default=_default)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
