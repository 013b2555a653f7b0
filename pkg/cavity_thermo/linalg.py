"""Operator and superoperator algebra on finite-dimensional Hilbert spaces.

Operators are dense complex ``numpy`` arrays. Superoperators wrap a
``scipy.sparse`` CSR matrix acting on column-stacked vectorized operators:
``vec(A X B) = (B^T kron A) vec(X)``.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidHamiltonianError,
    NumericalFailureError,
    PreconditionError,
)

logger = logging.getLogger(__name__)

Operator = np.ndarray

EIG_FLOOR = 1e-14
HERMITIAN_REL_TOL = 1e-12
STATE_HERMITIAN_TOL = 1e-10
STATE_TRACE_TOL = 1e-10
STATE_PSD_TOL = 1e-8


def is_hermitian(op: Operator, rel_tol: float = HERMITIAN_REL_TOL) -> bool:
    """Check ``max|A - A^dagger| <= rel_tol * max|A|`` (zero matrices are Hermitian)."""
    scale = float(np.max(np.abs(op))) if op.size else 0.0
    if scale == 0.0:
        return True
    return float(np.max(np.abs(op - op.conj().T))) <= rel_tol * scale


def _check_square(op: Operator, name: str = "operator") -> int:
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidDimensionError(f"{name} must be square, got shape {op.shape}")
    if not np.all(np.isfinite(op)):
        raise NumericalFailureError(f"{name} has non-finite entries")
    return int(op.shape[0])


def identity(dim: int) -> Operator:
    """Dense identity of the given dimension."""
    return np.eye(dim, dtype=complex)


def fock_annihilation(n_max: int) -> Operator:
    """
    Bosonic annihilation operator truncated to ``n_max`` Fock levels.

    Args:
        n_max: Number of retained levels (|0>, ..., |n_max - 1>)

    Returns:
        Matrix with ``<n|a|n+1> = sqrt(n+1)``

    Raises:
        InvalidDimensionError: If n_max < 2
    """
    if n_max < 2:
        raise InvalidDimensionError(f"n_max must be at least 2, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1).astype(complex)


def projector(i: int, j: int, dim: int) -> Operator:
    """Return ``|i><j|`` in a ``dim``-dimensional space."""
    if not (0 <= i < dim and 0 <= j < dim):
        raise InvalidDimensionError(f"|{i}><{j}| does not fit in dimension {dim}")
    op = np.zeros((dim, dim), dtype=complex)
    op[i, j] = 1.0
    return op


def kron(a: Operator, b: Operator) -> Operator:
    """Tensor product of two square operators."""
    _check_square(a, "left factor")
    _check_square(b, "right factor")
    return np.kron(a, b)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def vec(op: Operator) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(op).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int) -> Operator:
    """Inverse of :func:`vec`."""
    return np.asarray(vector).reshape((dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map on operators of a ``dim``-dimensional Hilbert space."""

    dim: int
    matrix: sp.csr_matrix

    def __post_init__(self) -> None:
        expected = (self.dim * self.dim, self.dim * self.dim)
        if self.matrix.shape != expected:
            raise InvalidDimensionError(
                f"superoperator shape {self.matrix.shape} does not match dimension {self.dim}"
            )

    def apply(self, rho: Union[Operator, "DensityMatrix"]) -> Operator:
        """Act on an operator and return the resulting operator."""
        data = rho.data if isinstance(rho, DensityMatrix) else rho
        if data.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"operator of shape {data.shape} on superoperator of dimension {self.dim}"
            )
        return unvec(self.matrix @ vec(data), self.dim)

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        if not isinstance(other, SuperOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatchError(f"cannot add dimensions {self.dim} and {other.dim}")
        return SuperOperator(self.dim, sp.csr_matrix(self.matrix + other.matrix))

    def __sub__(self, other: "SuperOperator") -> "SuperOperator":
        return self + (-1.0) * other

    def __rmul__(self, scalar: complex) -> "SuperOperator":
        return SuperOperator(self.dim, sp.csr_matrix(scalar * self.matrix))

    __mul__ = __rmul__

    def norm(self) -> float:
        """Maximum absolute row sum."""
        if self.matrix.nnz == 0:
            return 0.0
        return float(np.max(np.asarray(abs(self.matrix).sum(axis=1)).ravel()))

    def trace_residual(self) -> float:
        """Largest entry of the adjoint applied to the identity (zero if trace preserving)."""
        ident = vec(identity(self.dim))
        return float(np.max(np.abs(self.matrix.conj().T @ ident)))

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @classmethod
    def zero(cls, dim: int) -> "SuperOperator":
        return cls(dim, sp.csr_matrix((dim * dim, dim * dim), dtype=complex))


def spre(op: Operator) -> sp.csr_matrix:
    """Matrix of ``X -> A X``."""
    dim = op.shape[0]
    return sp.kron(sp.identity(dim, dtype=complex, format="csr"), sp.csr_matrix(op), "csr")


def spost(op: Operator) -> sp.csr_matrix:
    """Matrix of ``X -> X A``."""
    dim = op.shape[0]
    return sp.kron(sp.csr_matrix(op.T), sp.identity(dim, dtype=complex, format="csr"), "csr")


def dissipator_super(jump: Operator) -> SuperOperator:
    """
    Lindblad dissipator ``D[L] rho = L rho L^dagger - 1/2 {L^dagger L, rho}``.

    Args:
        jump: Jump operator L

    Returns:
        SuperOperator of D[L]
    """
    dim = _check_square(jump, "jump operator")
    ldag_l = jump.conj().T @ jump
    sandwich = sp.kron(sp.csr_matrix(jump.conj()), sp.csr_matrix(jump), "csr")
    matrix = sandwich - 0.5 * spre(ldag_l) - 0.5 * spost(ldag_l)
    return SuperOperator(dim, sp.csr_matrix(matrix))


def commutator_super(hamiltonian: Operator) -> SuperOperator:
    """
    Unitary generator ``rho -> -i [H, rho]``.

    Raises:
        InvalidHamiltonianError: If H is not Hermitian
    """
    dim = _check_square(hamiltonian, "Hamiltonian")
    if not is_hermitian(hamiltonian):
        raise InvalidHamiltonianError("Hamiltonian is not Hermitian")
    matrix = -1j * (spre(hamiltonian) - spost(hamiltonian))
    return SuperOperator(dim, sp.csr_matrix(matrix))


def dissipate(jump: Operator, rho: Operator) -> Operator:
    """Operator-level ``D[L] rho`` (no superoperator is built)."""
    ldag_l = jump.conj().T @ jump
    return jump @ rho @ jump.conj().T - 0.5 * (ldag_l @ rho + rho @ ldag_l)


def adjoint_dissipate(jump: Operator, observable: Operator) -> Operator:
    """Heisenberg-picture dissipator ``L^dagger X L - 1/2 {L^dagger L, X}``."""
    ldag_l = jump.conj().T @ jump
    return jump.conj().T @ observable @ jump - 0.5 * (ldag_l @ observable + observable @ ldag_l)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    Validated quantum state.

    The array is copied and made read-only. The eigendecomposition is computed
    once on demand.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=complex, copy=True)
        dim = _check_square(arr, "density matrix")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

        scale = max(1.0, float(np.max(np.abs(arr))))
        if float(np.max(np.abs(arr - arr.conj().T))) > STATE_HERMITIAN_TOL * scale:
            raise NumericalFailureError("density matrix is not Hermitian")
        trace = np.trace(arr)
        if abs(trace - 1.0) > STATE_TRACE_TOL:
            raise NumericalFailureError(f"density matrix trace is {trace.real:.12g}, not 1")
        if dim and self.eigenvalues[0] < -STATE_PSD_TOL:
            raise NumericalFailureError(
                f"density matrix has eigenvalue {self.eigenvalues[0]:.3e} below {-STATE_PSD_TOL}"
            )

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    @cached_property
    def eigh(self) -> Tuple[np.ndarray, np.ndarray]:
        try:
            values, vectors = np.linalg.eigh(self.data)
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"eigensolver failed: {e}") from e
        return values, vectors

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        try:
            return np.linalg.eigvalsh(self.data)
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"eigensolver failed: {e}") from e

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.data, self.data)))

    @classmethod
    def from_array(cls, data: Operator, normalize: bool = True) -> "DensityMatrix":
        """Hermitize (and optionally renormalize) a nearly valid state."""
        arr = np.asarray(data, dtype=complex)
        arr = 0.5 * (arr + arr.conj().T)
        if normalize:
            trace = np.trace(arr).real
            if trace <= 0 or not np.isfinite(trace):
                raise NumericalFailureError(f"cannot normalize state with trace {trace}")
            arr = arr / trace
        return cls(arr)

    @classmethod
    def pure(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(identity(dim) / dim)


def _as_array(rho: Union[DensityMatrix, Operator]) -> Operator:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)


def expectation(op: Operator, rho: Union[DensityMatrix, Operator]) -> complex:
    """
    Return ``Tr{A rho}``.

    Raises:
        DimensionMismatchError: If the operator and state dimensions differ
    """
    data = _as_array(rho)
    if op.shape != data.shape:
        raise DimensionMismatchError(f"operator {op.shape} and state {data.shape} differ")
    return complex(np.einsum("ij,ji->", op, data))


def _clipped_spectrum(rho: DensityMatrix) -> np.ndarray:
    values = np.clip(rho.eigenvalues, 0.0, None)
    return values / values.sum()


def vn_entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy ``-sum lambda ln lambda`` over eigenvalues above the floor."""
    values = _clipped_spectrum(rho)
    kept = values[values > EIG_FLOOR]
    return float(max(0.0, -np.sum(kept * np.log(kept))))


def log_state(rho: DensityMatrix, floor: float = EIG_FLOOR) -> Operator:
    """Matrix logarithm with eigenvalues floored at ``floor``."""
    values, vectors = rho.eigh
    logs = np.log(np.maximum(values, floor))
    return (vectors * logs) @ vectors.conj().T


def entropy_rate(rho: DensityMatrix, drho: Operator) -> float:
    """
    Rate of change of the von Neumann entropy, ``-Tr{drho ln rho}``.

    Args:
        rho: Current state
        drho: Time derivative of the state (Hermitian, traceless)

    Returns:
        dS/dt in units of 1/time

    Raises:
        PreconditionError: If drho is not traceless or not Hermitian
    """
    if drho.shape != rho.data.shape:
        raise DimensionMismatchError(f"state {rho.data.shape} and derivative {drho.shape} differ")
    scale = max(1.0, float(np.max(np.abs(drho))))
    if abs(np.trace(drho)) > 1e-8 * scale:
        raise PreconditionError(f"state derivative has trace {np.trace(drho):.3e}")
    if float(np.max(np.abs(drho - drho.conj().T))) > 1e-8 * scale:
        raise PreconditionError("state derivative is not Hermitian")

    values, vectors = rho.eigh
    small = values < EIG_FLOOR
    if np.any(small):
        weights = np.real(np.einsum("ki,kl,li->i", vectors.conj(), drho, vectors))
        leak = float(np.sum(np.abs(weights[small])))
        if leak > 1e-12:
            logger.warning(
                "entropy rate on a rank-deficient state: %d eigenvalues below %.0e carry "
                "flow %.3e; the floored logarithm underestimates the rate",
                int(np.sum(small)),
                EIG_FLOOR,
                leak,
            )
    return float(-np.real(np.einsum("ij,ji->", drho, log_state(rho))))


def random_density_matrix(
    dim: int, rng: np.random.Generator, rank: Optional[int] = None
) -> DensityMatrix:
    """Random state ``G G^dagger / Tr`` from a complex Ginibre matrix."""
    cols = dim if rank is None else rank
    g = rng.normal(size=(dim, cols)) + 1j * rng.normal(size=(dim, cols))
    rho = g @ g.conj().T
    return DensityMatrix.from_array(rho)


def random_unitary(dim: int, rng: np.random.Generator) -> Operator:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases
