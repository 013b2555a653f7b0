"""Object-oriented facade over the functional API.

Both interfaces are supported. The functions suit one-off evaluations; the
engine keeps a model, its solver options and the solved steady state, so
repeated queries on one model solve it only once.
"""

from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .audit import AuditReport, ToleranceProfile, audit_model
from .config import (
    EvolveConfig,
    RunConfig,
    SweepConfig,
    config_document,
    config_to_text,
    load_config,
)
from .io import write_config, write_state
from .linalg import DensityMatrix
from .models import ModelSpec, preset, with_parameter
from .solver import Liouvillian, SolverOptions, assemble, steady_state, truncation_report
from .sweep import TableResult, run_sweep, run_trajectory
from .thermo import ThermoReport, thermo_report


class CavityEngine:
    """
    Stateful engine for one driven cavity model.

    Example:
        ```python
        engine = CavityEngine.from_preset("kerr", {"drive.delta": 1.0})

        report = engine.report()
        print(report.Sigma_conv, report.Sigma_io)

        audit = engine.audit()
        assert audit.passed

        table = engine.sweep(SweepConfig.linear("drive.delta", -5, 5, 101))
        ```
    """

    def __init__(
        self,
        model: ModelSpec,
        options: Optional[SolverOptions] = None,
        tol_profile: Optional[ToleranceProfile] = None,
    ):
        """
        Initialize the engine.

        Args:
            model: Model to evaluate
            options: Solver options
            tol_profile: Audit tolerances
        """
        self.model = model
        self.options = options or SolverOptions()
        self.tol_profile = tol_profile or ToleranceProfile()
        self._liouvillian: Optional[Liouvillian] = None
        self._rho: Optional[DensityMatrix] = None

    @classmethod
    def from_preset(
        cls,
        name: str,
        overrides: Optional[Mapping[str, Any]] = None,
        options: Optional[SolverOptions] = None,
    ) -> "CavityEngine":
        """Engine for a named preset with dot-path overrides."""
        return cls(preset(name, overrides), options)

    @classmethod
    def from_config(cls, file_path: Union[str, Path]) -> "CavityEngine":
        """Engine for the model and solver options of a configuration file."""
        config = load_config(file_path)
        return cls(config.model, config.solver)

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "CavityEngine":
        return cls(config.model, config.solver)

    @property
    def liouvillian(self) -> Liouvillian:
        if self._liouvillian is None:
            self._liouvillian = assemble(self.model, self.options)
        return self._liouvillian

    def steady_state(self) -> DensityMatrix:
        """
        Solve (once) for the steady state.

        Raises:
            ConvergenceError: If no state meets the residual bound
            TruncationError: If the state leaks into the top Fock levels
        """
        if self._rho is None:
            rho = steady_state(self.liouvillian, self.options.method.value, options=self.options)
            truncation_report(rho, self.model, strict=True)
            self._rho = rho
        return self._rho

    def report(self, check: bool = True) -> ThermoReport:
        """Thermodynamic report of the steady state."""
        rho = self.steady_state()
        return thermo_report(self.model, rho, check=check)

    def audit(self, seed: Optional[int] = None) -> AuditReport:
        """Audit the steady state; an unsolvable model yields failed checks."""
        if self._rho is None:
            return audit_model(self.model, self.tol_profile, self.options, seed=seed)
        return audit_model(
            self.model,
            self.tol_profile,
            self.options,
            seed=seed,
            solved=(self.liouvillian, self._rho),
        )

    def sweep(self, config: SweepConfig, workers: int = 1, audit: bool = False) -> TableResult:
        """Sweep one parameter around this engine's model."""
        return run_sweep(self.model, config, self.options, workers, audit, self.tol_profile)

    def evolve(self, config: Optional[EvolveConfig] = None) -> TableResult:
        """Transient trajectory from the configured initial state."""
        return run_trajectory(self.model, config or EvolveConfig(), self.options)

    def with_parameter(self, path: str, value: Any) -> "CavityEngine":
        """New engine with one parameter changed (same options and tolerances)."""
        return CavityEngine(with_parameter(self.model, path, value), self.options, self.tol_profile)

    def save_state(self, file_path: Union[str, Path]) -> None:
        write_state(self.steady_state(), file_path)

    def save_config(self, file_path: Union[str, Path]) -> None:
        """Write the model and solver options as a configuration file."""
        write_config(config_document(self.model, self.options), file_path)

    def describe(self) -> str:
        """Configuration text of the model."""
        return config_to_text(self.model, self.options)

    def reload(self, file_path: Union[str, Path]) -> None:
        """Replace the model with the one in a configuration file."""
        config = load_config(file_path)
        self.model = config.model
        self.options = config.solver
        self._liouvillian = None
        self._rho = None
