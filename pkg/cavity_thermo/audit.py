"""Machine-checkable audit of every identity and inequality of a steady state.

Each check produces a :class:`CheckResult` with a unique name, a residual, the
tolerance it was compared against and the relation it tests. Solver or
consistency failures turn into failed checks; nothing here raises for a bad
model.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CavityThermoError
from .linalg import DensityMatrix, expectation, random_density_matrix
from .models import (
    BathChannel,
    ChannelKind,
    DriveSpec,
    IntraSystem,
    IntraVariant,
    ModelSpec,
    channel_temperature,
    displaced_gibbs_state,
    fingerprint,
    gibbs_state,
    model_operators,
    occupation_to_temperature,
)
from .solver import (
    Liouvillian,
    SolverOptions,
    assemble,
    shifted_form,
    steady_state,
    truncation_report,
)
from .thermo import (
    ThermoReport,
    cavity_heats,
    channel_powers,
    edge_corrected_occupation,
    edge_weight,
    spohn_contribution,
    thermo_report,
    tls_heat_closed_form,
    top_population,
)

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one named check."""

    name: str
    status: CheckStatus
    residual: float
    tolerance: float
    anchor: str
    detail: str = ""


@dataclass
class AuditReport:
    """All checks of one model, in execution order."""

    model_fingerprint: str
    seed: Optional[int] = None
    case: Optional[int] = None
    checks: List[CheckResult] = field(default_factory=list)
    report: Optional[ThermoReport] = None
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != CheckStatus.FAIL for c in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.status == CheckStatus.FAIL]

    def check(self, name: str) -> CheckResult:
        for result in self.checks:
            if result.name == name:
                return result
        raise KeyError(name)

    def add(self, result: CheckResult) -> None:
        if any(c.name == result.name for c in self.checks):
            raise ValueError(f"duplicate check name '{result.name}'")
        self.checks.append(result)


class ToleranceProfile:
    """Tolerances used by :func:`audit_model`."""

    def __init__(
        self,
        strict: float = 1e-9,
        numeric: float = 1e-7,
        fixed_point: float = 1e-8,
        nonneg_slack: float = 1e-9,
        spohn_sum: float = 1e-8,
        action: float = 1e-10,
        trace: float = 1e-10,
        oracle: float = 1e-8,
        steady_first_law: float = 1e-8,
    ):
        """
        Initialize a tolerance profile.

        Args:
            strict: Relative tolerance of algebraic identities (default: 1e-9)
            numeric: Tolerance of quantities involving matrix logarithms (default: 1e-7)
            fixed_point: Largest entry of a channel acting on its fixed point (default: 1e-8)
            nonneg_slack: Allowed negativity of entropy production rates (default: 1e-9)
            spohn_sum: Absolute tolerance of Spohn-sum reconstruction (default: 1e-8)
            action: Shifted vs unshifted generator action (default: 1e-10)
            trace: Trace preservation of the generator (default: 1e-10)
            oracle: Agreement with the analytic empty-cavity amplitude (default: 1e-8)
            steady_first_law: Relative steady-state energy balance (default: 1e-8)
        """
        self.strict = strict
        self.numeric = numeric
        self.fixed_point = fixed_point
        self.nonneg_slack = nonneg_slack
        self.spohn_sum = spohn_sum
        self.action = action
        self.trace = trace
        self.oracle = oracle
        self.steady_first_law = steady_first_law


# Displaced reference states and the io Spohn split are exact only on the
# untruncated space; their allowance grows with the weight on the top levels.
EDGE_ALLOWANCE_FACTOR = 10.0
ACTION_TEST_STATES = 20
ABSCISSA_MAX_DIM = 20


@dataclass(frozen=True)
class EmptyCavityOracle:
    a_mean: complex
    P_conv: float
    J_c_conv: float
    Sigma_conv: float


def analytic_empty_cavity(
    kappa: float, f: complex, delta: float, n_c: float, omega_d: float
) -> EmptyCavityOracle:
    """
    Closed-form steady state of a driven empty cavity (no truncation).

    ``<a> = -sqrt(kappa) f / (i delta + kappa/2)``,
    ``P = kappa^2 omega_d |f|^2 / (delta^2 + kappa^2/4)``, ``J_c = -P`` and
    ``Sigma = P / T_c``.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    a_mean = -math.sqrt(kappa) * complex(f) / (1j * delta + kappa / 2.0)
    power = kappa**2 * omega_d * abs(f) ** 2 / (delta**2 + kappa**2 / 4.0)
    temperature = occupation_to_temperature(n_c, omega_d)
    if temperature > 0:
        sigma = power / temperature
    else:
        sigma = math.inf if power > 0 else 0.0
    return EmptyCavityOracle(a_mean, power, -power, sigma)


class _Auditor:
    """Accumulates checks for one model."""

    def __init__(self, report: AuditReport, profile: ToleranceProfile):
        self.report = report
        self.profile = profile

    def record(
        self,
        name: str,
        residual: float,
        tolerance: float,
        anchor: str,
        detail: str = "",
        passed: Optional[bool] = None,
    ) -> CheckResult:
        if passed is None:
            passed = bool(residual <= tolerance)
        status = CheckStatus.PASS if passed else CheckStatus.FAIL
        result = CheckResult(name, status, float(residual), float(tolerance), anchor, detail)
        self.report.add(result)
        if not passed:
            logger.debug(
                "check %s failed: residual %.3e > %.3e %s", name, residual, tolerance, detail
            )
        return result

    def skip(self, name: str, anchor: str, detail: str) -> None:
        self.report.add(CheckResult(name, CheckStatus.SKIPPED, math.nan, math.nan, anchor, detail))

    def fail(self, name: str, anchor: str, error: Exception) -> None:
        detail = f"{type(error).__name__}: {error}"
        self.record(name, math.inf, 0.0, anchor, detail=detail, passed=False)

    def guarded(self, name: str, anchor: str, body: Callable[[], Tuple[float, float]]) -> None:
        """Run ``body`` returning (residual, tolerance); exceptions become failures."""
        try:
            residual, tolerance = body()
        except CavityThermoError as e:
            self.fail(name, anchor, e)
            return
        self.record(name, residual, tolerance, anchor)


def _round_off(norm: float, floor: float) -> float:
    return max(floor, 64.0 * EPS * norm)


def _generator_checks(aud: _Auditor, liouvillian: Liouvillian) -> None:
    profile = aud.profile
    norm = liouvillian.total.norm()
    aud.record(
        "generator.trace_preservation",
        liouvillian.total.trace_residual(),
        _round_off(norm, profile.trace),
        "adjoint of the generator annihilates the identity",
    )
    aud.record(
        "generator.decomposition",
        liouvillian.decomposition_residual(),
        _round_off(norm, 1e-12),
        "generator equals Hamiltonian part plus every channel part",
    )
    if liouvillian.dim <= ABSCISSA_MAX_DIM:
        eigenvalues = np.linalg.eigvals(liouvillian.total.to_dense())
        abscissa = float(np.max(eigenvalues.real))
        aud.record(
            "generator.spectral_abscissa",
            max(0.0, abscissa),
            max(profile.trace, 1e3 * EPS * norm),
            "no generator eigenvalue has positive real part",
        )
    else:
        aud.skip(
            "generator.spectral_abscissa",
            "no generator eigenvalue has positive real part",
            f"dimension {liouvillian.dim} above {ABSCISSA_MAX_DIM}",
        )


def _state_checks(
    aud: _Auditor, liouvillian: Liouvillian, rho: DensityMatrix, options: SolverOptions
) -> float:
    norm = liouvillian.total.norm()
    aud.record(
        "steady_state.residual",
        liouvillian.residual(rho),
        options.tol * norm,
        "||L rho_ss|| <= tol ||L||",
    )
    data = rho.data
    defect = max(
        abs(np.trace(data) - 1.0),
        float(np.max(np.abs(data - data.conj().T))),
        max(0.0, -float(rho.eigenvalues[0])),
    )
    aud.record(
        "steady_state.density_matrix",
        defect,
        1e-8,
        "steady state is Hermitian, unit trace and positive",
    )
    trunc = truncation_report(rho, liouvillian.model, strict=False)
    aud.record(
        "truncation.tail_mass",
        trunc.tail_mass,
        1e-3,
        "population in the top 10% of Fock levels stays below 1e-3",
        detail=trunc.status,
    )
    return trunc.tail_mass


def _scale(model: ModelSpec) -> float:
    return model.drive.omega_d * model.kappa_total


def _identity_checks(
    aud: _Auditor, liouvillian: Liouvillian, rho: DensityMatrix, rep: ThermoReport
) -> None:
    model = liouvillian.model
    profile = aud.profile
    ops = model_operators(model)
    scale = _scale(model)

    def rel(*values: float) -> float:
        return profile.strict * max([scale] + [abs(v) for v in values])

    def decomposition() -> Tuple[float, float]:
        worst = 0.0
        weighted_n = model.drive.omega_d * np.asarray(ops.n)
        h_td_intra = np.asarray(ops.h_td_intra)
        for channel, sup in liouvillian.channel_parts:
            flow = sup.apply(rho)
            # cavity baths leave the intra energy alone and vice versa
            foreign = h_td_intra if channel.is_cavity else weighted_n
            worst = max(worst, abs(expectation(foreign, flow)))
        dissipative = sum(
            (sup for _, sup in liouvillian.channel_parts[1:]), liouvillian.channel_parts[0][1]
        ).apply(rho)
        total_heat = expectation(np.asarray(ops.h_td), dissipative).real
        split = rep.J_c_conv + sum(rep.J_intra.values())
        worst = max(worst, abs(total_heat - split))
        return worst, rel(total_heat, split)

    aud.guarded(
        "heat.decomposition",
        "Tr{H'_TD L_c rho} = 0, Tr{omega_d n L' rho} = 0 and total heat splits into J_c + sum J'",
        decomposition,
    )

    h_td = np.asarray(ops.h_td)
    h_rot = np.asarray(ops.h_rot)
    commutator_form = (-1j * expectation(h_td @ h_rot - h_rot @ h_td, rho)).real
    aud.record(
        "power.commutator_form",
        abs(rep.P_conv - commutator_form),
        rel(rep.P_conv, commutator_form),
        "P = -2 sqrt(kappa) omega_d Re(f* <a>) equals -i <[H_TD, H]>",
    )

    n_mean = rep.n_mean
    worst = 0.0
    for channel in model.cavity_channels:
        trace_form = cavity_heats(model, rho, check=False)[channel.label]
        occupation = edge_corrected_occupation(model, channel, rho)
        closed = model.drive.omega_d * channel.rate * (occupation - n_mean)
        worst = max(worst, abs(trace_form - closed) / rel(trace_form, closed) * profile.strict)
    aud.record(
        "heat.cavity_closed_form",
        worst,
        profile.strict,
        "Tr{omega_d n L_c rho} = omega_d kappa (n_c - <n>) with edge-corrected n_c",
    )

    connected = rep.n_var_connected
    worst = 0.0
    for channel in model.accessible_channels:
        trace_form = rep.J_io_channels[channel.label]
        occupation = edge_corrected_occupation(model, channel, rho)
        closed = model.drive.omega_d * channel.rate * (occupation - connected)
        worst = max(worst, abs(trace_form - closed) / rel(trace_form, closed) * profile.strict)
    aud.record(
        "heat.io_closed_form",
        worst,
        profile.strict,
        "Tr{omega_d n L_s rho} = omega_d kappa (n_c - <<n>>) with edge-corrected n_c",
    )

    tls_anchor = "J' = omega_d gamma (2 n_q + 1)(n_F - <sigma_+ sigma_->)"
    if model.intra.variant == IntraVariant.TLS:
        worst = 0.0
        for channel in model.intra_channels:
            closed = tls_heat_closed_form(model, channel, rho)
            worst = max(worst, abs(rep.J_intra[channel.label] - closed))
        aud.record(
            "heat.tls_closed_form",
            worst,
            rel(),
            tls_anchor,
        )
    else:
        aud.skip("heat.tls_closed_form", tls_anchor, "no two-level system")

    conv_total = rep.P_conv + rep.J_c_conv
    io_total = rep.P_io + rep.J_c_io
    aud.record(
        "first_law.frameworks",
        abs(conv_total - io_total),
        rel(conv_total, io_total),
        "P + J_c = P_io + J_c_io",
    )

    heats = [rep.J_c_conv] + list(rep.J_intra.values())
    balance = rep.P_conv + sum(heats)
    aud.record(
        "first_law.steady",
        abs(balance),
        profile.steady_first_law * max([abs(rep.P_conv), scale] + [abs(h) for h in heats]),
        "dU/dt = P + sum J = 0 at steady state",
    )

    powers = channel_powers(model, rho)
    accessible = sum(powers[c.label] + rep.J_c_channels[c.label] for c in model.accessible_channels)
    field_energy = -model.drive.omega_d * (rep.flux_delta_coherent + rep.noise_flux_delta)
    aud.record(
        "output_field.flux_identity",
        abs(field_energy - accessible),
        rel(field_energy, accessible),
        "-omega_d (|b_out|^2 - |f|^2 + kappa(<<n>> - n_c)) = P + J_c",
    )


def _fixed_point_checks(
    aud: _Auditor, liouvillian: Liouvillian, rho: DensityMatrix, alpha: complex
) -> Dict[str, float]:
    """Returns the edge allowance per accessible channel."""
    model = liouvillian.model
    profile = aud.profile
    for channel, sup in liouvillian.channel_parts:
        temperature = channel_temperature(model, channel)
        sigma = gibbs_state(model, temperature)
        aud.record(
            f"fixed_point.{channel.label}",
            float(np.max(np.abs(sup.apply(sigma.state)))),
            profile.fixed_point,
            "the channel annihilates the Gibbs state of H_TD at its temperature",
            detail=f"T={temperature:.6g}",
        )

    allowances: Dict[str, float] = {}
    shifted = shifted_form(liouvillian, model, rho)
    for channel, sup in shifted.ls_parts:
        temperature = channel_temperature(model, channel)
        sigma = displaced_gibbs_state(model, temperature, alpha)
        allowance = (
            EDGE_ALLOWANCE_FACTOR
            * channel.rate
            * (channel.occupation + 1.0)
            * model.n_max
            * (1.0 + abs(alpha)) ** 2
            * edge_weight(model, sigma.state)
        )
        allowances[channel.label] = allowance
        aud.record(
            f"fixed_point.shifted.{channel.label}",
            float(np.max(np.abs(sup.apply(sigma.state)))),
            profile.fixed_point + allowance,
            "the shifted dissipator annihilates the displaced Gibbs state",
            detail=f"edge allowance {allowance:.3e}",
        )
    return allowances


def _second_law_checks(aud: _Auditor, model: ModelSpec, rep: ThermoReport) -> bool:
    """Returns whether both rates are finite."""
    profile = aud.profile
    conv, io = rep.Sigma_conv, rep.Sigma_io
    finite = math.isfinite(conv) and math.isfinite(io)
    if not finite:
        aud.report.notes.append(
            "zero-temperature bath with nonzero heat: infinite entropy production"
        )

    aud.record(
        "second_law.conv_nonnegative",
        max(0.0, -conv),
        profile.nonneg_slack,
        "Sigma_conv >= 0",
        passed=conv >= -profile.nonneg_slack,
    )
    aud.record(
        "second_law.io_nonnegative",
        max(0.0, -io),
        profile.nonneg_slack,
        "Sigma_io >= 0",
        passed=io >= -profile.nonneg_slack,
    )
    if finite:
        slack = profile.nonneg_slack * max(1.0, abs(conv))
        aud.record("second_law.ordering", max(0.0, io - conv), slack, "Sigma_conv >= Sigma_io")
    else:
        aud.record(
            "second_law.ordering",
            0.0 if conv >= io else math.inf,
            0.0,
            "Sigma_conv >= Sigma_io",
            passed=conv >= io and not math.isnan(conv),
        )

    if rep.abs_a_sq <= 1e-12:
        aud.skip("second_law.strict", "Sigma_conv > Sigma_io", "|<a>|^2 <= 1e-12")
    elif math.isinf(conv) and math.isinf(io):
        aud.skip("second_law.strict", "Sigma_conv > Sigma_io", "both rates infinite")
    else:
        aud.record("second_law.strict", conv - io, 0.0, "Sigma_conv > Sigma_io", passed=conv > io)

    temperatures = [rep.temperatures[c.label] for c in model.accessible_channels]
    if finite and all(t > 0 for t in temperatures):
        expected = sum(
            model.drive.omega_d * c.rate * rep.abs_a_sq / rep.temperatures[c.label]
            for c in model.accessible_channels
        )
        gap = conv - io
        floor = sum(
            model.drive.omega_d * c.rate / rep.temperatures[c.label]
            for c in model.accessible_channels
        )
        aud.record(
            "second_law.gap_identity",
            abs(gap - expected),
            profile.strict * max(abs(gap), abs(expected), floor),
            "Sigma_conv - Sigma_io = omega_d sum_j kappa_j |<a>|^2 / T_j",
        )
    else:
        aud.skip(
            "second_law.gap_identity",
            "Sigma_conv - Sigma_io = omega_d sum_j kappa_j |<a>|^2 / T_j",
            "zero-temperature cavity bath",
        )
    return finite


def _spohn_checks(
    aud: _Auditor,
    liouvillian: Liouvillian,
    rho: DensityMatrix,
    rep: ThermoReport,
    allowances: Dict[str, float],
    finite: bool,
) -> None:
    model = liouvillian.model
    profile = aud.profile
    shifted = shifted_form(liouvillian, model, rho)
    shifted_parts = {c.label: sup for c, sup in shifted.ls_parts}
    edge = edge_weight(model, rho)

    for framework, target in (("conv", rep.Sigma_conv), ("io", rep.Sigma_io)):
        terms: List[float] = []
        total_allowance = 0.0
        complete = True
        for channel, sup in liouvillian.channel_parts:
            name = f"spohn.{framework}.{channel.label}"
            anchor = "-Tr{D rho (ln rho - ln sigma)} >= 0 for the channel fixed point sigma"
            temperature = channel_temperature(model, channel)
            if temperature == 0:
                aud.skip(name, anchor, "zero-temperature reference state has no logarithm")
                complete = False
                continue
            allowance = 0.0
            fixed_tol = profile.fixed_point
            if framework == "io" and channel.label in shifted_parts:
                sup = shifted_parts[channel.label]
                reference = displaced_gibbs_state(model, temperature, shifted.alpha)
                fixed_tol += allowances.get(channel.label, 0.0)
                allowance = (
                    EDGE_ALLOWANCE_FACTOR
                    * channel.rate
                    * (channel.occupation + 1.0)
                    * model.n_max**2
                    * (1.0 + abs(shifted.alpha)) ** 2
                    * (model.drive.omega_d / temperature)
                    * edge
                )
            else:
                reference = gibbs_state(model, temperature)
            try:
                term = spohn_contribution(sup, rho, reference, fixed_tol=fixed_tol)
            except CavityThermoError as e:
                aud.fail(name, anchor, e)
                complete = False
                continue
            terms.append(term)
            total_allowance += allowance
            aud.record(
                name,
                max(0.0, -term),
                profile.nonneg_slack + allowance,
                anchor,
                detail=f"term {term:.6e}",
            )

        sum_name = f"spohn.{framework}.sum"
        sum_anchor = f"sum of Spohn terms equals Sigma_{framework}"
        if not complete or not finite:
            aud.skip(sum_name, sum_anchor, "a channel term is unavailable or the rate is infinite")
            continue
        total = sum(terms)
        aud.record(
            sum_name,
            abs(total - target),
            profile.spohn_sum + total_allowance,
            sum_anchor,
            detail=f"sum {total:.6e}",
        )


def _is_empty_cavity(model: ModelSpec) -> bool:
    return model.intra.variant == IntraVariant.NONE and len(model.channels) == 1


def _oracle_edge_shift(model: ModelSpec, rho: DensityMatrix) -> float:
    """
    Bound on how far truncation moves ``<a>`` of an empty cavity.

    On ``n_max`` levels ``[a, a^dagger] = 1 - n_max P_top``, so the stationary
    amplitude picks up ``n_max (sqrt(kappa) f p_top + kappa n/2 <a P_top>)``
    divided by ``i delta + kappa/2``.
    """
    channel = model.channels[0]
    n_max = model.n_max
    coherence = abs(rho.data[n_max - 1, n_max - 2]) * math.sqrt(n_max - 1)
    drive = math.sqrt(channel.rate) * abs(model.drive.amplitude_f) * top_population(model, rho)
    shift = n_max * (drive + 0.5 * channel.rate * channel.occupation * coherence)
    return shift / abs(1j * model.delta + channel.rate / 2.0)


def audit_model(
    model: ModelSpec,
    tol_profile: Optional[ToleranceProfile] = None,
    options: Optional[SolverOptions] = None,
    seed: Optional[int] = None,
    case: Optional[int] = None,
    solved: Optional[Tuple[Liouvillian, DensityMatrix]] = None,
) -> AuditReport:
    """
    Solve a model and run every check on its steady state.

    Args:
        model: Model to audit
        tol_profile: Tolerances (default profile when omitted)
        options: Solver options
        seed: Seed for the random test states of the action identity
        case: Fuzz case index, recorded in the report
        solved: Generator and steady state already computed for ``model``

    Returns:
        AuditReport; solver failures show up as failed checks
    """
    profile = tol_profile or ToleranceProfile()
    options = options or SolverOptions()
    report = AuditReport(model_fingerprint=fingerprint(model), seed=seed, case=case)
    aud = _Auditor(report, profile)

    if solved is not None:
        liouvillian, rho = solved
        _generator_checks(aud, liouvillian)
        return _audit_state(aud, liouvillian, rho, options, seed)

    try:
        liouvillian = assemble(model, options)
    except CavityThermoError as e:
        aud.record(
            "generator.assemble", math.inf, 0.0, "generator can be assembled", str(e), passed=False
        )
        return report
    _generator_checks(aud, liouvillian)

    try:
        rho = steady_state(liouvillian, options.method.value, options=options)
    except CavityThermoError as e:
        aud.record(
            "steady_state.residual",
            getattr(e, "residual", math.inf),
            options.tol * liouvillian.total.norm(),
            "||L rho_ss|| <= tol ||L||",
            detail=f"{type(e).__name__}: {e}",
            passed=False,
        )
        return report
    return _audit_state(aud, liouvillian, rho, options, seed)


def _audit_state(
    aud: _Auditor,
    liouvillian: Liouvillian,
    rho: DensityMatrix,
    options: SolverOptions,
    seed: Optional[int],
) -> AuditReport:
    model = liouvillian.model
    profile = aud.profile
    report = aud.report
    tail = _state_checks(aud, liouvillian, rho, options)
    try:
        rep = thermo_report(model, rho, dS_dt=0.0, check=False, tail_mass=tail)
    except CavityThermoError as e:
        aud.record(
            "thermo.report", math.inf, 0.0, "thermodynamic report evaluates", str(e), passed=False
        )
        return report
    report.report = rep

    _identity_checks(aud, liouvillian, rho, rep)
    allowances = _fixed_point_checks(aud, liouvillian, rho, rep.a_mean)

    rng = np.random.default_rng(seed)
    states = [random_density_matrix(model.dim, rng) for _ in range(ACTION_TEST_STATES)]
    shifted = shifted_form(liouvillian, model, rho)
    aud.record(
        "shifted_form.action_identity",
        shifted.action_residual(liouvillian, states),
        _round_off(liouvillian.total.norm(), profile.action),
        "shifted Hamiltonian and dissipators generate the same dynamics",
    )

    finite = _second_law_checks(aud, model, rep)
    _spohn_checks(aud, liouvillian, rho, rep, allowances, finite)

    bath_temperatures = {rep.temperatures[c.label] for c in model.channels}
    noisier_anchor = "J_c_io <= 0: the output is noisier than the input"
    if not model.intra_channels and len(bath_temperatures) == 1:
        aud.record(
            "io_heat.output_noisier",
            max(0.0, rep.J_c_io),
            profile.strict * _scale(model),
            noisier_anchor,
        )
    else:
        aud.skip("io_heat.output_noisier", noisier_anchor, "more than one bath")

    oracle_anchor = "<a> = -sqrt(kappa) f / (i delta + kappa/2)"
    if _is_empty_cavity(model):
        channel = model.channels[0]
        drive = model.drive
        oracle = analytic_empty_cavity(
            channel.rate, drive.amplitude_f, model.delta, channel.occupation, drive.omega_d
        )
        shift = _oracle_edge_shift(model, rho)
        aud.record(
            "oracle.empty_cavity",
            abs(rep.a_mean - oracle.a_mean),
            profile.oracle + 2.0 * shift,
            oracle_anchor,
            detail=f"edge shift {shift:.3e}",
        )
    else:
        aud.skip("oracle.empty_cavity", oracle_anchor, "not an empty cavity")

    _engine_notes(model, rep, report)
    return report


def _engine_notes(model: ModelSpec, rep: ThermoReport, report: AuditReport) -> None:
    if model.intra.variant != IntraVariant.MASER:
        return
    hot = [rep.J_intra[c.label] for c in model.intra_channels if "maser-hot" in c.jumps]
    cold = [rep.J_intra[c.label] for c in model.intra_channels if "maser-cold" in c.jumps]
    engine_io = rep.P_io < 0 < rep.P_conv
    heat_flow = bool(hot and cold and sum(hot) > 0 > sum(cold))
    report.notes.append(
        f"maser signs: P_conv {'>' if rep.P_conv > 0 else '<='} 0, "
        f"P_io {'<' if rep.P_io < 0 else '>='} 0, "
        f"J_hot {'>' if sum(hot) > 0 else '<='} 0, J_cold {'<' if sum(cold) < 0 else '>='} 0"
        + ("; engine region (io framework)" if engine_io and heat_flow else "")
    )


class FuzzRanges:
    """Parameter ranges for :func:`fuzz`."""

    def __init__(
        self,
        variants: Sequence[str] = ("empty", "kerr"),
        omega: Tuple[float, float] = (1e2, 1e4),
        delta: Tuple[float, float] = (-3.0, 3.0),
        amplitude: Tuple[float, float] = (0.0, 1.0),
        rate: Tuple[float, float] = (0.5, 2.0),
        occupation: Tuple[float, float] = (0.0, 1.0),
        zero_occupation_probability: float = 0.2,
        kerr: Tuple[float, float] = (0.0, 0.1),
        coupling: Tuple[float, float] = (0.0, 0.3),
        intra_rate: Tuple[float, float] = (0.02, 0.5),
        extra_channel_probability: float = 0.3,
        n_max_bounds: Tuple[int, int] = (12, 32),
    ):
        """
        Initialize fuzz ranges.

        Args:
            variants: Model families to draw from (empty, kerr, tls)
            omega: Cavity frequency range
            delta: Detuning range
            amplitude: Drive amplitude magnitude range (random phase)
            rate: Cavity channel rate range
            occupation: Bath occupation range
            zero_occupation_probability: Chance that a cavity bath is at zero temperature
            kerr: Kerr coefficient range
            coupling: Two-level coupling range
            intra_rate: Two-level bath rate range
            extra_channel_probability: Chance of adding a second accessible and an
                inaccessible cavity channel (each drawn independently)
            n_max_bounds: Smallest and largest Fock truncation
        """
        self.variants = tuple(variants)
        self.omega = omega
        self.delta = delta
        self.amplitude = amplitude
        self.rate = rate
        self.occupation = occupation
        self.zero_occupation_probability = zero_occupation_probability
        self.kerr = kerr
        self.coupling = coupling
        self.intra_rate = intra_rate
        self.extra_channel_probability = extra_channel_probability
        self.n_max_bounds = n_max_bounds


def fuzz_model(rng: np.random.Generator, ranges: FuzzRanges) -> ModelSpec:
    """Draw one random model; ``n_max`` is sized from the expected photon number."""
    variant = ranges.variants[int(rng.integers(len(ranges.variants)))]
    omega = float(rng.uniform(*ranges.omega))
    delta = float(rng.uniform(*ranges.delta))
    f = float(rng.uniform(*ranges.amplitude)) * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))

    def occupation() -> float:
        if rng.random() < ranges.zero_occupation_probability:
            return 0.0
        return float(rng.uniform(*ranges.occupation))

    def rate() -> float:
        return float(rng.uniform(*ranges.rate))

    channels = [BathChannel("cavity", ChannelKind.CAVITY_ACCESSIBLE, rate(), occupation())]
    if rng.random() < ranges.extra_channel_probability:
        channels.append(BathChannel("port2", ChannelKind.CAVITY_ACCESSIBLE, rate(), occupation()))
    if rng.random() < ranges.extra_channel_probability:
        channels.append(
            BathChannel(
                "loss",
                ChannelKind.CAVITY_INACCESSIBLE,
                rate(),
                occupation(),
                input_amplitude=complex(0.5 * rng.uniform(*ranges.amplitude)),
            )
        )

    if variant == "kerr":
        intra = IntraSystem(IntraVariant.KERR, K=float(rng.uniform(*ranges.kerr)))
    elif variant == "tls":
        intra = IntraSystem(
            IntraVariant.TLS,
            omega_q=omega + float(rng.uniform(*ranges.delta)),
            g=float(rng.uniform(*ranges.coupling)),
        )
        channels.append(
            BathChannel(
                "tls",
                ChannelKind.INTRA,
                float(rng.uniform(*ranges.intra_rate)),
                occupation(),
                ("tls",),
            )
        )
    elif variant == "empty":
        intra = IntraSystem()
    else:
        raise ValueError(f"fuzzing does not cover variant '{variant}'")

    kappa = sum(c.rate for c in channels if c.is_cavity)
    drive_power = abs(f) ** 2 + sum(abs(c.input_amplitude) ** 2 for c in channels)
    photons = 4.0 * drive_power * len(channels) / kappa + max(c.occupation for c in channels)
    low, high = ranges.n_max_bounds
    n_max = int(min(high, max(low, math.ceil(12 + 5 * photons))))
    return ModelSpec(omega, n_max, DriveSpec(f, omega - delta), intra, tuple(channels))


def fuzz(
    seed: int,
    count: int,
    parameter_ranges: Optional[FuzzRanges] = None,
    tol_profile: Optional[ToleranceProfile] = None,
    options: Optional[SolverOptions] = None,
    workers: int = 1,
) -> List[AuditReport]:
    """
    Audit ``count`` random models drawn deterministically from ``seed``.

    Each case gets its own child of ``numpy.random.SeedSequence(seed)``, so
    results do not depend on ``workers``. Reports come back in case order.
    """
    ranges = parameter_ranges or FuzzRanges()
    children = np.random.SeedSequence(seed).spawn(count)

    def run(case: int) -> AuditReport:
        rng = np.random.default_rng(children[case])
        model = fuzz_model(rng, ranges)
        state_seed = int(rng.integers(2**32))
        report = audit_model(model, tol_profile, options, seed=state_seed, case=case)
        report.seed = seed
        if not report.passed:
            logger.error(
                "fuzz case %d (seed %d) failed: %s",
                case,
                seed,
                ", ".join(c.name for c in report.failures),
            )
        return report

    if workers <= 1:
        return [run(case) for case in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(count)))
