"""Parameter sweeps and transient trajectories as table rows."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .audit import ToleranceProfile, audit_model
from .config import EvolveConfig, SweepConfig
from .errors import CavityThermoError, ConfigError, ModelError
from .io import read_state
from .linalg import DensityMatrix, entropy_rate, fock_annihilation
from .models import ModelSpec, channel_temperature, gibbs_state, with_parameter
from .solver import Liouvillian, SolverOptions, assemble, evolve, steady_state, truncation_report
from .thermo import ThermoReport, thermo_report

logger = logging.getLogger(__name__)

BASE_COLUMNS = ("U", "P_conv", "J_c_conv")
TAIL_COLUMNS = (
    "P_io",
    "J_c_io",
    "Sigma_conv",
    "Sigma_io",
    "T_Sigma_conv",
    "T_Sigma_io",
    "n_mean",
    "abs_a_sq",
    "purity",
    "tail_mass",
)
EXTRA_COLUMNS = (
    "dS_dt",
    "n_var_connected",
    "a_mean_re",
    "a_mean_im",
    "b_out_re",
    "b_out_im",
    "flux_delta_coherent",
    "noise_flux_delta",
    "P_prime",
)


def report_columns(model: ModelSpec) -> List[str]:
    """Default output columns; one ``J_<label>`` per non-accessible channel."""
    extra = [f"J_{c.label}" for c in model.channels if c not in model.accessible_channels]
    return [*BASE_COLUMNS, *extra, *TAIL_COLUMNS]


@dataclass
class TableResult:
    """Rows in input order plus the indices of the points that failed."""

    columns: List[str]
    rows: List[Dict[str, Any]]
    failed: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed


def _nan_row(columns: Sequence[str], keys: Dict[str, Any]) -> Dict[str, Any]:
    row: Dict[str, Any] = {name: math.nan for name in columns}
    row.update(keys)
    return row


def _select(columns: Sequence[str], keys: Dict[str, Any], report: ThermoReport) -> Dict[str, Any]:
    values = report.as_row()
    row = {name: values.get(name, math.nan) for name in columns}
    row.update(keys)
    return row


def solve_point(
    model: ModelSpec,
    options: Optional[SolverOptions] = None,
    check: bool = True,
) -> Tuple[Liouvillian, DensityMatrix, ThermoReport]:
    """
    Generator, steady state and full report of one model.

    Raises:
        TruncationError: If the steady state leaks into the top Fock levels
        ConvergenceError: If no steady state meets the residual bound
        ConsistencyError: If check is set and two evaluations disagree
    """
    options = options or SolverOptions()
    liouvillian = assemble(model, options)
    rho = steady_state(liouvillian, options.method.value, options=options)
    tail = truncation_report(rho, model, strict=True).tail_mass
    return liouvillian, rho, thermo_report(model, rho, check=check, tail_mass=tail)


def _sweep_models(base: ModelSpec, config: SweepConfig) -> List[Tuple[Dict[str, Any], ModelSpec]]:
    series = [None] if config.series is None else list(config.series_values)
    points = []
    for s in series:
        outer = base if config.series is None else with_parameter(base, config.series, s)
        for v in config.values:
            keys: Dict[str, Any] = {}
            if config.series is not None:
                keys[config.series] = s
            keys[config.parameter] = v
            points.append((keys, with_parameter(outer, config.parameter, v)))
    return points


def run_sweep(
    base: ModelSpec,
    config: SweepConfig,
    options: Optional[SolverOptions] = None,
    workers: int = 1,
    audit: bool = False,
    tol_profile: Optional[ToleranceProfile] = None,
) -> TableResult:
    """
    Evaluate the report at every sweep point.

    Points may run concurrently; rows come back in input order (series-major).
    A point whose solve or audit fails still yields a row, filled with NaN
    when no state was obtained, and its index is listed in ``failed``.

    Args:
        base: Model the sweep parameters are applied to
        config: Swept parameter, values, optional series and output columns
        options: Solver options
        workers: Thread count
        audit: Audit every point and count failed audits as failures
        tol_profile: Audit tolerances

    Raises:
        ModelError: If a parameter path does not resolve
        ConfigError: If an output column is unknown
    """
    options = options or SolverOptions()
    points = _sweep_models(base, config)
    keys = [k for k in (config.series, config.parameter) if k is not None]
    if config.outputs:
        known = set(report_columns(base)) | set(EXTRA_COLUMNS)
        unknown = [name for name in config.outputs if name not in known]
        if unknown:
            raise ConfigError(f"unknown output column '{unknown[0]}'", field="outputs")
    columns = keys + list(config.outputs or report_columns(base))

    def run(index: int) -> Tuple[Dict[str, Any], bool]:
        point_keys, model = points[index]
        try:
            liouvillian, rho, report = solve_point(model, options)
        except CavityThermoError as e:
            logger.error("sweep point %d %s failed: %s: %s", index, point_keys, type(e).__name__, e)
            return _nan_row(columns, point_keys), False
        ok = True
        if audit:
            result = audit_model(model, tol_profile, options, seed=index, solved=(liouvillian, rho))
            if not result.passed:
                ok = False
                names = ", ".join(c.name for c in result.failures)
                logger.error("sweep point %d %s failed audit: %s", index, point_keys, names)
        return _select(columns, point_keys, report), ok

    if workers <= 1:
        outcomes = [run(i) for i in range(len(points))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(len(points))))

    result = TableResult(columns, [row for row, _ in outcomes])
    result.failed = [i for i, (_, ok) in enumerate(outcomes) if not ok]
    logger.info("sweep of %d points finished with %d failures", len(points), len(result.failed))
    return result


def coherent_state(model: ModelSpec, alpha: complex) -> DensityMatrix:
    """Truncated coherent state of the cavity times the intra ground state."""
    a = fock_annihilation(model.n_max)
    vacuum = np.zeros(model.n_max, dtype=complex)
    vacuum[0] = 1.0
    psi = scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a) @ vacuum
    ground = np.zeros(model.intra.dim, dtype=complex)
    ground[0] = 1.0
    full = np.kron(psi, ground)
    return DensityMatrix.pure(full / np.linalg.norm(full))


def initial_state(model: ModelSpec, config: EvolveConfig) -> DensityMatrix:
    """
    Initial state of a transient run.

    ``vacuum`` is the cavity vacuum times the intra ground state, ``thermal``
    the Gibbs state at the drive-channel temperature, ``coherent`` uses
    ``config.alpha`` and ``file`` loads ``config.state_file``.
    """
    if config.initial == "vacuum":
        return coherent_state(model, 0j)
    if config.initial == "coherent":
        return coherent_state(model, config.alpha)
    if config.initial == "thermal":
        return gibbs_state(model, channel_temperature(model, model.drive_channel)).state
    if config.initial == "file":
        return read_state(config.state_file or "", expected_dim=model.dim)
    raise ModelError(f"unknown initial state '{config.initial}'")


def run_trajectory(
    model: ModelSpec,
    config: EvolveConfig,
    options: Optional[SolverOptions] = None,
    rho0: Optional[DensityMatrix] = None,
) -> TableResult:
    """
    Integrate from the initial state and report every sample time.

    Each row carries ``t``, the entropy rate of the state and the report
    columns; the entropy production uses that rate.

    Raises:
        StiffnessError: If the integration step bound is too small
    """
    options = options or SolverOptions()
    liouvillian = assemble(model, options)
    start = rho0 if rho0 is not None else initial_state(model, config)
    grid = config.t_grid()
    states = evolve(liouvillian, start, grid, max_step=config.max_step)

    columns = ["t", "dS_dt", *report_columns(model)]
    rows = []
    for t, rho in zip(grid, states):
        drho = liouvillian.total.apply(rho)
        drho = 0.5 * (drho + drho.conj().T)
        rate = entropy_rate(rho, drho)
        tail = truncation_report(rho, model, strict=False).tail_mass
        report = thermo_report(model, rho, dS_dt=rate, check=True, tail_mass=tail)
        rows.append(_select(columns, {"t": float(t), "dS_dt": rate}, report))
    return TableResult(columns, rows)
