"""Exception hierarchy for cavity_thermo.

Every error carries the process exit code the command line maps it to.
"""

from typing import Optional


class CavityThermoError(Exception):
    """Base class for all cavity_thermo errors."""

    exit_code = 1


class InvalidDimensionError(CavityThermoError):
    """Raised when an operator dimension is out of range."""

    pass


class DimensionMismatchError(CavityThermoError):
    """Raised when operands act on different Hilbert spaces."""

    pass


class InvalidHamiltonianError(CavityThermoError):
    """Raised when a Hamiltonian is not Hermitian."""

    pass


class NumericalFailureError(CavityThermoError):
    """Raised when a linear-algebra kernel fails or returns non-finite values."""

    pass


class ModelError(CavityThermoError):
    """Raised for invalid model parameters or inconsistent channel definitions."""

    pass


class DimensionOverflowError(CavityThermoError):
    """Raised when the generator would exceed the configured size cap."""

    exit_code = 2


class ConvergenceError(CavityThermoError):
    """Raised when a steady-state solve does not meet its residual bound."""

    exit_code = 2

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class AmbiguousSteadyStateError(ConvergenceError):
    """Raised when the generator has more than one stationary state."""

    def __init__(self, nullity: Optional[int] = None):
        size = str(nullity) if nullity is not None else "at least 2"
        super().__init__(f"Steady state is not unique: null space has dimension {size}")
        self.nullity = nullity


class StiffnessError(CavityThermoError):
    """Raised when the integrator step would fall below the minimum step."""

    exit_code = 2


class TruncationError(CavityThermoError):
    """Raised when too much population sits in the top Fock levels."""

    exit_code = 3

    def __init__(self, message: str, tail_mass: float):
        super().__init__(message)
        self.tail_mass = tail_mass


class ConsistencyError(CavityThermoError):
    """Raised when two evaluations of the same quantity disagree."""

    def __init__(self, quantity: str, first: float, second: float, tolerance: float):
        super().__init__(
            f"{quantity}: {first!r} and {second!r} differ by {abs(first - second):.3e} "
            f"(tolerance {tolerance:.3e})"
        )
        self.quantity = quantity
        self.first = first
        self.second = second
        self.tolerance = tolerance


class PreconditionError(CavityThermoError):
    """Raised when an operation's precondition does not hold."""

    pass


class ConfigError(CavityThermoError):
    """Raised for malformed or invalid configuration input."""

    exit_code = 64

    def __init__(
        self, message: str, line: Optional[int] = None, field: Optional[str] = None
    ):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field


class ThermoFileError(CavityThermoError):
    """Raised for file I/O errors."""

    exit_code = 64
