"""cavity-thermo - Thermodynamics of driven open cavities in two bookkeeping frameworks."""

from .audit import (
    AuditReport,
    CheckResult,
    CheckStatus,
    FuzzRanges,
    ToleranceProfile,
    analytic_empty_cavity,
    audit_model,
    fuzz,
)
from .config import (
    EvolveConfig,
    RunConfig,
    SweepConfig,
    config_document,
    config_from_text,
    config_to_text,
    load_config,
)
from .engine import CavityEngine
from .errors import (
    AmbiguousSteadyStateError,
    CavityThermoError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DimensionMismatchError,
    DimensionOverflowError,
    InvalidDimensionError,
    InvalidHamiltonianError,
    ModelError,
    NumericalFailureError,
    PreconditionError,
    StiffnessError,
    ThermoFileError,
    TruncationError,
)
from .io import read_config, read_csv, read_state, write_config, write_csv, write_state
from .linalg import (
    DensityMatrix,
    SuperOperator,
    commutator_super,
    dissipator_super,
    entropy_rate,
    expectation,
    spost,
    spre,
    vn_entropy,
)
from .models import (
    BathChannel,
    ChannelKind,
    DriveSpec,
    IntraSystem,
    IntraVariant,
    ModelSpec,
    build_channels,
    build_hamiltonian_rotating,
    build_thermo_hamiltonian,
    displaced_gibbs_state,
    gibbs_state,
    preset,
    with_parameter,
)
from .parser import parse_config
from .paths import flatten_object, unflatten_object
from .schema import ConfigSchema, Field, FieldType, Schema, ValidationError
from .serializer import stringify_config
from .solver import (
    Liouvillian,
    SolverOptions,
    assemble,
    evolve,
    shifted_form,
    steady_state,
    truncation_report,
)
from .streaming import CsvRowWriter, csv_row_writer
from .sweep import TableResult, run_sweep, run_trajectory
from .thermo import (
    ThermoReport,
    conventional_heat_cavity,
    conventional_power,
    entropy_production,
    intra_heat,
    io_heat,
    io_power,
    output_field,
    sensitivity_ratio,
    spohn_contribution,
    thermo_report,
)

__version__ = "0.1.0"
__all__ = [
    # Linear algebra
    "DensityMatrix",
    "SuperOperator",
    "spre",
    "spost",
    "dissipator_super",
    "commutator_super",
    "expectation",
    "vn_entropy",
    "entropy_rate",
    # Models
    "ModelSpec",
    "DriveSpec",
    "IntraSystem",
    "IntraVariant",
    "BathChannel",
    "ChannelKind",
    "preset",
    "with_parameter",
    "build_hamiltonian_rotating",
    "build_thermo_hamiltonian",
    "build_channels",
    "gibbs_state",
    "displaced_gibbs_state",
    # Solver
    "Liouvillian",
    "SolverOptions",
    "assemble",
    "steady_state",
    "evolve",
    "shifted_form",
    "truncation_report",
    # Thermodynamics
    "ThermoReport",
    "thermo_report",
    "conventional_power",
    "conventional_heat_cavity",
    "intra_heat",
    "io_power",
    "io_heat",
    "output_field",
    "entropy_production",
    "spohn_contribution",
    "sensitivity_ratio",
    # Audit
    "AuditReport",
    "CheckResult",
    "CheckStatus",
    "ToleranceProfile",
    "FuzzRanges",
    "audit_model",
    "fuzz",
    "analytic_empty_cavity",
    # Configuration
    "RunConfig",
    "SweepConfig",
    "EvolveConfig",
    "load_config",
    "config_from_text",
    "config_document",
    "config_to_text",
    "parse_config",
    "stringify_config",
    "flatten_object",
    "unflatten_object",
    "Field",
    "FieldType",
    "Schema",
    "ConfigSchema",
    "ValidationError",
    # File I/O
    "read_config",
    "write_config",
    "read_state",
    "write_state",
    "read_csv",
    "write_csv",
    "CsvRowWriter",
    "csv_row_writer",
    # Sweeps and trajectories
    "TableResult",
    "run_sweep",
    "run_trajectory",
    # Object-oriented API
    "CavityEngine",
    # Errors
    "CavityThermoError",
    "InvalidDimensionError",
    "DimensionMismatchError",
    "InvalidHamiltonianError",
    "NumericalFailureError",
    "ModelError",
    "DimensionOverflowError",
    "ConvergenceError",
    "AmbiguousSteadyStateError",
    "StiffnessError",
    "TruncationError",
    "ConsistencyError",
    "PreconditionError",
    "ConfigError",
    "ThermoFileError",
]
