"""Thermodynamic bookkeeping of a driven cavity state.

Two frameworks are computed side by side:

- conventional: heat is everything the dissipators exchange with ``H_TD``;
- input-output: the coherent part of the output field is counted as work,
  which moves ``omega_d * kappa * |<a>|^2`` per accessible channel from heat
  to power.

Every quantity that has a closed form is evaluated twice (trace form and
closed form) and the two are compared; a disagreement raises
:class:`~cavity_thermo.errors.ConsistencyError`. The reported values are the
trace forms.

Truncation: on ``n_max`` Fock levels ``Tr{n D[a^dagger] rho} = <n+1> - n_max p_top``
where ``p_top`` is the population of the highest level. Closed forms use the
edge-corrected occupation ``n_c (1 - n_max p_top)`` so both forms agree to
round-off.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConsistencyError, PreconditionError
from .linalg import (
    DensityMatrix,
    SuperOperator,
    adjoint_dissipate,
    expectation,
    identity,
    log_state,
)
from .models import (
    BathChannel,
    ChannelKind,
    IntraVariant,
    ModelSpec,
    ReferenceState,
    channel_temperature,
    model_operators,
)
from .solver import truncation_report

logger = logging.getLogger(__name__)

CONSISTENCY_REL_TOL = 1e-9
FIXED_POINT_TOL = 1e-8
ZERO_TEMPERATURE_HEAT_TOL = 1e-9


def _energy_scale(model: ModelSpec) -> float:
    return model.drive.omega_d * model.kappa_total


def _assert_close(model: ModelSpec, quantity: str, first: float, second: float) -> None:
    tolerance = CONSISTENCY_REL_TOL * max(abs(first), abs(second), _energy_scale(model))
    if not abs(first - second) <= tolerance:
        raise ConsistencyError(quantity, first, second, tolerance)


def _a_mean(model: ModelSpec, rho: DensityMatrix) -> complex:
    return expectation(np.asarray(model_operators(model).a), rho)


def _n_mean(model: ModelSpec, rho: DensityMatrix) -> float:
    return expectation(np.asarray(model_operators(model).n), rho).real


def top_population(model: ModelSpec, rho: DensityMatrix) -> float:
    """Population of the highest retained Fock level."""
    return expectation(np.asarray(model_operators(model).top_projector), rho).real


def edge_corrected_occupation(model: ModelSpec, channel: BathChannel, rho: DensityMatrix) -> float:
    """``n (1 - n_max p_top)``: the occupation a truncated dissipator actually imposes."""
    return channel.occupation * (1.0 - model.n_max * top_population(model, rho))


def edge_weight(model: ModelSpec, rho: Union[DensityMatrix, np.ndarray], levels: int = 2) -> float:
    """Absolute weight (populations and coherences) on the top ``levels`` Fock rows."""
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    rows = levels * model.intra.dim
    return float(np.sum(np.abs(data[-rows:, :])))


def internal_energy(model: ModelSpec, rho: DensityMatrix) -> float:
    """``U = <H_TD>``."""
    return expectation(np.asarray(model_operators(model).h_td), rho).real


def channel_powers(model: ModelSpec, rho: DensityMatrix) -> Dict[str, float]:
    """Conventional power delivered by the coherent input of each cavity channel."""
    alpha = _a_mean(model, rho)
    omega_d = model.drive.omega_d
    powers: Dict[str, float] = {}
    for c in model.cavity_channels:
        overlap = (np.conj(model.input_amplitude(c)) * alpha).real
        powers[c.label] = -2.0 * math.sqrt(c.rate) * omega_d * float(overlap)
    return powers


def conventional_power(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> float:
    """
    Total power ``P = -sum_j 2 sqrt(kappa_j) omega_d Re(f_j* <a>)``.

    Cross-checked against ``-i <[H_TD, H]>``.

    Raises:
        ConsistencyError: If the two forms disagree
    """
    power = sum(channel_powers(model, rho).values())
    if check:
        ops = model_operators(model)
        h_td = np.asarray(ops.h_td)
        h_rot = np.asarray(ops.h_rot)
        commutator_form = (-1j * expectation(h_td @ h_rot - h_rot @ h_td, rho)).real
        _assert_close(model, "power (drive formula vs commutator)", power, commutator_form)
    return power


def _cavity_heat_trace(model: ModelSpec, channel: BathChannel, rho: DensityMatrix) -> float:
    ops = model_operators(model)
    a = np.asarray(ops.a)
    weighted_n = model.drive.omega_d * np.asarray(ops.n)
    observable = channel.rate * (channel.occupation + 1.0) * adjoint_dissipate(a, weighted_n)
    if channel.occupation > 0:
        observable = observable + channel.rate * channel.occupation * adjoint_dissipate(
            a.conj().T, weighted_n
        )
    return expectation(observable, rho).real


def cavity_heats(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> Dict[str, float]:
    """
    Conventional heat current from each cavity channel, ``Tr{omega_d n D_j rho}``.

    Raises:
        ConsistencyError: If a trace form disagrees with
            ``omega_d kappa (n_eff - <n>)``
    """
    n_mean = _n_mean(model, rho)
    heats = {}
    for channel in model.cavity_channels:
        value = _cavity_heat_trace(model, channel, rho)
        if check:
            closed = model.drive.omega_d * channel.rate * (
                edge_corrected_occupation(model, channel, rho) - n_mean
            )
            _assert_close(model, f"cavity heat '{channel.label}'", value, closed)
        heats[channel.label] = value
    return heats


def conventional_heat_cavity(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> float:
    """Heat current ``J_c`` summed over the accessible cavity channels."""
    heats = cavity_heats(model, rho, check=check)
    return sum(heats[c.label] for c in model.accessible_channels)


def intra_heat(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> Dict[str, float]:
    """
    Heat from every bath that is not an accessible cavity channel.

    Intra channels give ``Tr{H'_TD D_l rho}``; inaccessible cavity channels
    give their conventional heat. For two-level-system channels the closed
    form ``omega_d gamma (2n+1)(n_F - p_e)`` with ``n_F = n/(2n+1)`` is
    compared with the trace form.

    Raises:
        ConsistencyError: If the closed form disagrees
    """
    ops = model_operators(model)
    h_td_intra = np.asarray(ops.h_td_intra)
    cavity = cavity_heats(model, rho, check=check)
    heats: Dict[str, float] = {}
    for channel in model.channels:
        if channel.kind == ChannelKind.CAVITY_INACCESSIBLE:
            heats[channel.label] = cavity[channel.label]
        elif channel.kind == ChannelKind.INTRA:
            heats[channel.label] = _intra_trace(model, channel, rho, h_td_intra)
            if check and model.intra.variant == IntraVariant.TLS:
                closed = tls_heat_closed_form(model, channel, rho)
                quantity = f"two-level heat '{channel.label}'"
                _assert_close(model, quantity, heats[channel.label], closed)
    return heats


def _intra_trace(
    model: ModelSpec, channel: BathChannel, rho: DensityMatrix, h_td_intra: np.ndarray
) -> float:
    ops = model_operators(model)
    observable = np.zeros_like(h_td_intra)
    for template in channel.jumps:
        lower, raise_ = ops.jumps[template]
        observable = observable + channel.rate * (channel.occupation + 1.0) * adjoint_dissipate(
            lower, h_td_intra
        )
        observable = observable + channel.rate * channel.occupation * adjoint_dissipate(
            raise_, h_td_intra
        )
    return expectation(observable, rho).real


def tls_heat_closed_form(model: ModelSpec, channel: BathChannel, rho: DensityMatrix) -> float:
    """``omega_d gamma (2n+1)(n_F - <sigma_+ sigma_->)`` for a two-level-system bath."""
    lower, _ = model_operators(model).jumps["tls"]
    excited = expectation(lower.conj().T @ lower, rho).real
    n = channel.occupation
    n_fermi = n / (2.0 * n + 1.0)
    return model.drive.omega_d * channel.rate * (2.0 * n + 1.0) * (n_fermi - excited)


def channel_io_powers(model: ModelSpec, rho: DensityMatrix) -> Dict[str, float]:
    """
    Input-output power per cavity channel.

    Accessible channels give ``-omega_d (|f_j + sqrt(kappa_j) <a>|^2 - |f_j|^2)``;
    inaccessible channels keep their conventional power.
    """
    alpha = _a_mean(model, rho)
    conventional = channel_powers(model, rho)
    powers = {}
    for c in model.cavity_channels:
        if c.kind == ChannelKind.CAVITY_ACCESSIBLE:
            f = model.input_amplitude(c)
            output = abs(f + math.sqrt(c.rate) * alpha) ** 2
            powers[c.label] = -model.drive.omega_d * (output - abs(f) ** 2)
        else:
            powers[c.label] = conventional[c.label]
    return powers


def io_power(model: ModelSpec, rho: DensityMatrix) -> float:
    """Total input-output power."""
    return sum(channel_io_powers(model, rho).values())


def _io_heat_trace(
    model: ModelSpec, channel: BathChannel, rho: DensityMatrix, alpha: complex
) -> float:
    ops = model_operators(model)
    a = np.asarray(ops.a)
    eye = identity(model.dim)
    weighted_n = model.drive.omega_d * np.asarray(ops.n)
    shifted_a = a - alpha * eye
    rate, occupation = channel.rate, channel.occupation
    observable = rate * (occupation + 1.0) * adjoint_dissipate(shifted_a, weighted_n)
    if occupation > 0:
        raised = adjoint_dissipate(shifted_a.conj().T, weighted_n)
        observable = observable + rate * occupation * raised
    return expectation(observable, rho).real


def io_heats(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> Dict[str, float]:
    """
    Input-output heat of each accessible channel, ``Tr{omega_d n D_s,j rho}``.

    Raises:
        ConsistencyError: If it disagrees with
            ``omega_d kappa_j (n_eff - (<n> - |<a>|^2))``
    """
    alpha = _a_mean(model, rho)
    connected = _n_mean(model, rho) - abs(alpha) ** 2
    heats = {}
    for channel in model.accessible_channels:
        value = _io_heat_trace(model, channel, rho, alpha)
        if check:
            closed = model.drive.omega_d * channel.rate * (
                edge_corrected_occupation(model, channel, rho) - connected
            )
            _assert_close(model, f"io heat '{channel.label}'", value, closed)
        heats[channel.label] = value
    return heats


def io_heat(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> float:
    """Input-output heat ``J_c^io`` summed over the accessible channels."""
    return sum(io_heats(model, rho, check=check).values())


@dataclass(frozen=True)
class OutputField:
    """Coherent output amplitude and flux differences (output minus input)."""

    b_out_coherent: complex
    flux_delta_coherent: float
    noise_flux_delta: float


def output_field(model: ModelSpec, rho: DensityMatrix, check: bool = True) -> OutputField:
    """
    Output-field moments from the input-output relation ``b_out = b_in + sqrt(kappa) a``.

    ``b_out_coherent`` belongs to the drive channel; the flux differences are
    summed over accessible channels. Energy entering the system through the
    fields equals ``-omega_d (flux_delta_coherent + noise_flux_delta)`` and must
    match ``P + J_c`` of those channels.

    Raises:
        ConsistencyError: If the energy balance fails
    """
    alpha = _a_mean(model, rho)
    connected = _n_mean(model, rho) - abs(alpha) ** 2
    drive_channel = model.drive_channel
    b_out = model.input_amplitude(drive_channel) + math.sqrt(drive_channel.rate) * alpha
    coherent = 0.0
    noise = 0.0
    for channel in model.accessible_channels:
        f = model.input_amplitude(channel)
        coherent += abs(f + math.sqrt(channel.rate) * alpha) ** 2 - abs(f) ** 2
        noise += channel.rate * (connected - edge_corrected_occupation(model, channel, rho))
    result = OutputField(complex(b_out), float(coherent), float(noise))
    if check:
        powers = channel_powers(model, rho)
        heats = cavity_heats(model, rho, check=False)
        accessible = sum(powers[c.label] + heats[c.label] for c in model.accessible_channels)
        _assert_close(
            model, "field energy balance", -model.drive.omega_d * (coherent + noise), accessible
        )
    return result


def _entropy_flow(
    model: ModelSpec, heats: Dict[str, float], temperatures: Dict[str, float]
) -> Tuple[float, bool]:
    """``-sum J/T``; zero-temperature baths use the sentinel rule."""
    total = 0.0
    sentinel = False
    for label, heat in heats.items():
        temperature = temperatures[label]
        if temperature > 0:
            total -= heat / temperature
            continue
        channel = model.channel(label)
        threshold = ZERO_TEMPERATURE_HEAT_TOL * max(1.0, channel.rate * model.drive.omega_d)
        if abs(heat) <= threshold:
            continue
        sentinel = True
        logger.warning(
            "Channel '%s' is at zero temperature with heat %.3e; entropy production is %s",
            label,
            heat,
            "+inf" if heat < 0 else "-inf",
        )
        total += math.inf if heat < 0 else -math.inf
    return total, sentinel


def channel_temperatures(model: ModelSpec) -> Dict[str, float]:
    return {c.label: channel_temperature(model, c) for c in model.channels}


def entropy_production(
    model: ModelSpec, rho: DensityMatrix, dS_dt: float = 0.0, check: bool = True
) -> Tuple[float, float]:
    """
    Conventional and input-output entropy production rates.

    ``Sigma = dS/dt - sum_p J_p / T_p`` over every bath, with accessible
    cavity heats taken from the respective framework. A nonzero heat
    exchanged with a zero-temperature bath gives an infinite rate.

    Args:
        model: Model
        rho: State
        dS_dt: Rate of change of the von Neumann entropy (0 at steady state)
        check: Cross-check closed forms

    Returns:
        (Sigma_conv, Sigma_io)
    """
    temperatures = channel_temperatures(model)
    cavity = cavity_heats(model, rho, check=check)
    others = intra_heat(model, rho, check=check)
    io = io_heats(model, rho, check=check)
    accessible = {c.label: cavity[c.label] for c in model.accessible_channels}
    conv_flow, _ = _entropy_flow(model, {**accessible, **others}, temperatures)
    io_flow, _ = _entropy_flow(model, {**io, **others}, temperatures)
    return dS_dt + conv_flow, dS_dt + io_flow


def spohn_contribution(
    part: SuperOperator,
    rho: DensityMatrix,
    sigma_fixed: Union[ReferenceState, DensityMatrix],
    fixed_tol: float = FIXED_POINT_TOL,
) -> float:
    """
    Entropy production of one dissipator relative to its fixed point.

    ``-Tr{D rho (ln rho - ln sigma)}``, nonnegative when ``sigma`` is a fixed
    point of ``D``.

    Args:
        part: Dissipator of one channel
        rho: State
        sigma_fixed: Fixed point of ``part`` (a ReferenceState carries its exact log)
        fixed_tol: Allowed ``max|D sigma|``

    Returns:
        The contribution (units of rate)

    Raises:
        PreconditionError: If sigma is not a fixed point or has no logarithm
    """
    if isinstance(sigma_fixed, ReferenceState):
        sigma, log_sigma = sigma_fixed.state, sigma_fixed.log
        if log_sigma is None:
            raise PreconditionError("reference state is singular (zero temperature); no logarithm")
    else:
        sigma, log_sigma = sigma_fixed, log_state(sigma_fixed)
    residual = float(np.max(np.abs(part.apply(sigma))))
    if residual > fixed_tol:
        raise PreconditionError(f"reference state is not a fixed point: residual {residual:.3e}")
    flow = part.apply(rho)
    return float(-np.real(np.einsum("ij,ji->", flow, log_state(rho) - log_sigma)))


def dissipated_power(
    model: ModelSpec,
    sigma: float,
    heats: Dict[str, float],
    temperatures: Dict[str, float],
    dS_dt: float,
) -> float:
    """
    ``T_d * Sigma`` with ``T_d`` the drive-channel temperature.

    When every bath shares ``T_d`` this is evaluated as ``T_d dS/dt - sum J``,
    which stays finite at zero temperature.
    """
    t_drive = temperatures[model.drive_channel.label]
    if all(t == t_drive for t in temperatures.values()):
        return t_drive * dS_dt - sum(heats.values())
    if t_drive > 0 and math.isfinite(sigma):
        return t_drive * sigma
    return math.nan


def sensitivity_ratio(reference: Sequence[float], changed: Sequence[float]) -> float:
    """
    How far a curve moves between two parameter values.

    ``max_i |changed_i - reference_i| / max_i |reference_i|``; infinite when
    the reference curve vanishes identically and the changed one does not.
    """
    ref = np.asarray(reference, dtype=float)
    new = np.asarray(changed, dtype=float)
    if ref.shape != new.shape or ref.size == 0:
        raise ValueError("curves must be non-empty and of equal length")
    shift = float(np.max(np.abs(new - ref)))
    peak = float(np.max(np.abs(ref)))
    if peak == 0:
        return 0.0 if shift == 0 else math.inf
    return shift / peak


@dataclass(frozen=True)
class ThermoReport:
    """All thermodynamic quantities of one state, energies in drive quanta times rate."""

    U: float
    P_conv: float
    J_c_conv: float
    J_intra: Dict[str, float]
    P_io: float
    J_c_io: float
    dS_dt: float
    Sigma_conv: float
    Sigma_io: float
    b_out_coherent: complex
    a_mean: complex
    n_mean: float
    n_var_connected: float
    flux_delta_coherent: float = 0.0
    noise_flux_delta: float = 0.0
    P_channels: Dict[str, float] = field(default_factory=dict)
    P_io_channels: Dict[str, float] = field(default_factory=dict)
    J_c_channels: Dict[str, float] = field(default_factory=dict)
    J_io_channels: Dict[str, float] = field(default_factory=dict)
    temperatures: Dict[str, float] = field(default_factory=dict)
    T_Sigma_conv: float = math.nan
    T_Sigma_io: float = math.nan
    purity: float = 1.0
    tail_mass: float = 0.0
    # H' is time independent, so the intra power vanishes
    P_prime: float = 0.0

    @property
    def abs_a_sq(self) -> float:
        return abs(self.a_mean) ** 2

    @property
    def zero_temperature_sentinel(self) -> bool:
        return not (math.isfinite(self.Sigma_conv) and math.isfinite(self.Sigma_io))

    def as_row(self) -> Dict[str, float]:
        """Flat mapping of every scalar column (per-channel entries are prefixed)."""
        row: Dict[str, float] = {
            "U": self.U,
            "P_conv": self.P_conv,
            "J_c_conv": self.J_c_conv,
        }
        for label, value in self.J_intra.items():
            row[f"J_{label}"] = value
        row.update(
            P_io=self.P_io,
            J_c_io=self.J_c_io,
            dS_dt=self.dS_dt,
            Sigma_conv=self.Sigma_conv,
            Sigma_io=self.Sigma_io,
            T_Sigma_conv=self.T_Sigma_conv,
            T_Sigma_io=self.T_Sigma_io,
            n_mean=self.n_mean,
            n_var_connected=self.n_var_connected,
            abs_a_sq=self.abs_a_sq,
            a_mean_re=self.a_mean.real,
            a_mean_im=self.a_mean.imag,
            b_out_re=self.b_out_coherent.real,
            b_out_im=self.b_out_coherent.imag,
            flux_delta_coherent=self.flux_delta_coherent,
            noise_flux_delta=self.noise_flux_delta,
            purity=self.purity,
            tail_mass=self.tail_mass,
            P_prime=self.P_prime,
        )
        return row


def thermo_report(
    model: ModelSpec,
    rho: DensityMatrix,
    dS_dt: float = 0.0,
    check: bool = True,
    tail_mass: Optional[float] = None,
) -> ThermoReport:
    """
    Evaluate every quantity of both frameworks on one state.

    Args:
        model: Model the state belongs to
        rho: State
        dS_dt: Entropy rate (0 at steady state)
        check: Cross-check closed and trace forms
        tail_mass: Truncation tail mass to record (computed when omitted)

    Returns:
        ThermoReport

    Raises:
        ConsistencyError: If any cross-check fails
    """
    alpha = _a_mean(model, rho)
    n_mean = _n_mean(model, rho)
    temperatures = channel_temperatures(model)

    powers = channel_powers(model, rho)
    p_conv = conventional_power(model, rho, check=check)
    cavity = cavity_heats(model, rho, check=check)
    others = intra_heat(model, rho, check=check)
    io_powers = channel_io_powers(model, rho)
    io = io_heats(model, rho, check=check)
    field_moments = output_field(model, rho, check=check)

    j_c = sum(cavity[c.label] for c in model.accessible_channels)
    j_io = sum(io.values())
    p_io = sum(io_powers.values())
    if check:
        _assert_close(model, "first law across frameworks", p_conv + j_c, p_io + j_io)

    accessible = {c.label: cavity[c.label] for c in model.accessible_channels}
    conv_heats = {**accessible, **others}
    io_all = {**io, **others}
    conv_flow, _ = _entropy_flow(model, conv_heats, temperatures)
    io_flow, _ = _entropy_flow(model, io_all, temperatures)
    sigma_conv = dS_dt + conv_flow
    sigma_io = dS_dt + io_flow

    if tail_mass is None:
        tail_mass = truncation_report(rho, model, strict=False).tail_mass

    return ThermoReport(
        U=internal_energy(model, rho),
        P_conv=p_conv,
        J_c_conv=j_c,
        J_intra=others,
        P_io=p_io,
        J_c_io=j_io,
        dS_dt=dS_dt,
        Sigma_conv=sigma_conv,
        Sigma_io=sigma_io,
        b_out_coherent=field_moments.b_out_coherent,
        a_mean=alpha,
        n_mean=n_mean,
        n_var_connected=n_mean - abs(alpha) ** 2,
        flux_delta_coherent=field_moments.flux_delta_coherent,
        noise_flux_delta=field_moments.noise_flux_delta,
        P_channels=powers,
        P_io_channels=io_powers,
        J_c_channels=accessible,
        J_io_channels=io,
        temperatures=temperatures,
        T_Sigma_conv=dissipated_power(model, sigma_conv, conv_heats, temperatures, dS_dt),
        T_Sigma_io=dissipated_power(model, sigma_io, io_all, temperatures, dS_dt),
        purity=rho.purity,
        tail_mass=tail_mass,
    )
