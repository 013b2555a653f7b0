"""Generator assembly, steady states, time evolution and the shifted form.

The generator is
``L rho = -i[H, rho] + sum_j D_j rho``
with one dissipator per bath channel (see :func:`cavity_thermo.models.build_channels`).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    AmbiguousSteadyStateError,
    ConvergenceError,
    DimensionOverflowError,
    NumericalFailureError,
    StiffnessError,
    TruncationError,
)
from .linalg import (
    DensityMatrix,
    Operator,
    SuperOperator,
    commutator_super,
    dissipator_super,
    expectation,
    identity,
    unvec,
    vec,
)
from .models import BathChannel, ChannelKind, ModelSpec, build_channels, model_operators

logger = logging.getLogger(__name__)

TAIL_WARN = 1e-6
TAIL_ERROR = 1e-3
_NULL_TOL = 1e-9


class SteadyStateMethod(str, Enum):
    AUTO = "auto"
    DENSE_NULL = "dense-null"
    SPARSE_DIRECT = "sparse-direct"
    EVOLVE = "evolve"


class SolverOptions:
    """Options for generator assembly and steady-state solves."""

    def __init__(
        self,
        method: str = "auto",
        tol: float = 1e-10,
        dense_limit: int = 64,
        max_dim: int = 256,
        max_steps: int = 2_000_000,
    ):
        """
        Initialize solver options.

        Args:
            method: auto, dense-null, sparse-direct or evolve (default: auto)
            tol: Relative residual bound ``||L rho|| <= tol * ||L||`` (default: 1e-10)
            dense_limit: Largest Hilbert dimension solved densely by ``auto`` (default: 64)
            max_dim: Largest Hilbert dimension assembled at all (default: 256)
            max_steps: Step cap for evolve-to-stationary (default: 2,000,000)
        """
        self.method = SteadyStateMethod(method)
        self.tol = tol
        self.dense_limit = dense_limit
        self.max_dim = max_dim
        self.max_steps = max_steps


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Full generator together with its Hamiltonian and per-channel parts."""

    model: ModelSpec
    total: SuperOperator
    hamiltonian_part: SuperOperator
    channel_parts: Tuple[Tuple[BathChannel, SuperOperator], ...]

    @property
    def dim(self) -> int:
        return self.total.dim

    def part(self, label: str) -> SuperOperator:
        for channel, sup in self.channel_parts:
            if channel.label == label:
                return sup
        raise KeyError(label)

    def decomposition_residual(self) -> float:
        """Largest entry of ``total - H part - sum(channel parts)``."""
        rest = self.total - self.hamiltonian_part
        for _, sup in self.channel_parts:
            rest = rest - sup
        return float(np.max(np.abs(rest.matrix.data))) if rest.matrix.nnz else 0.0

    def residual(self, rho: DensityMatrix) -> float:
        """``||L vec(rho)||_2``."""
        return float(np.linalg.norm(self.total.matrix @ vec(rho.data)))


def assemble(model: ModelSpec, options: Optional[SolverOptions] = None) -> Liouvillian:
    """
    Assemble the generator of a model.

    Raises:
        DimensionOverflowError: If the Hilbert dimension exceeds ``options.max_dim``
    """
    options = options or SolverOptions()
    if model.dim > options.max_dim:
        raise DimensionOverflowError(
            f"Hilbert dimension {model.dim} ({model.n_max} Fock levels x {model.intra.dim}) "
            f"gives a {model.dim ** 2} x {model.dim ** 2} generator; "
            f"limit is dimension {options.max_dim}"
        )
    ops = model_operators(model)
    hamiltonian_part = commutator_super(np.asarray(ops.h_rot))
    parts = tuple(build_channels(model))
    total = hamiltonian_part
    for _, sup in parts:
        total = total + sup
    logger.debug(
        "Assembled generator: dim=%d, nnz=%d, norm=%.3e", model.dim, total.matrix.nnz, total.norm()
    )
    return Liouvillian(model, total, hamiltonian_part, parts)


def _bordered_system(sup: SuperOperator) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Replace the first row by the trace functional; right-hand side e_0."""
    d = sup.dim
    size = d * d
    trace_row = sp.csr_matrix(
        (np.ones(d, dtype=complex), (np.zeros(d, dtype=int), np.arange(d) * (d + 1))),
        shape=(1, size),
    )
    bordered = sp.vstack([trace_row, sup.matrix[1:]], format="csr")
    rhs = np.zeros(size, dtype=complex)
    rhs[0] = 1.0
    return bordered, rhs


def _finish(liouvillian: Liouvillian, x: np.ndarray, method: str) -> DensityMatrix:
    if not np.all(np.isfinite(x)):
        raise ConvergenceError(f"{method}: solution has non-finite entries")
    try:
        return DensityMatrix.from_array(unvec(x, liouvillian.dim))
    except NumericalFailureError as e:
        raise ConvergenceError(f"{method}: solution is not a valid state ({e})") from e


def _solve_dense(liouvillian: Liouvillian, tol: float) -> DensityMatrix:
    dense = liouvillian.total.to_dense()
    singular_values = scipy.linalg.svdvals(dense)
    nullity = int(np.sum(singular_values <= tol * singular_values[0]))
    if nullity > 1:
        raise AmbiguousSteadyStateError(nullity)
    bordered, rhs = _bordered_system(liouvillian.total)
    try:
        x = scipy.linalg.solve(bordered.toarray(), rhs)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise ConvergenceError(f"dense solve failed: {e}") from e
    return _finish(liouvillian, x, "dense-null")


def _sparse_nullity(sup: SuperOperator, tol: float) -> Optional[int]:
    """Count eigenvalues of ``L`` near zero by shift-invert; ``None`` when ARPACK gives up."""
    size = sup.matrix.shape[0]
    k = min(3, size - 2)
    norm = sup.norm()
    if k < 2 or norm == 0.0:
        return None
    # spectrum lies in Re <= 0, so a positive shift keeps L - sigma regular
    try:
        eigenvalues = spla.eigs(
            sup.matrix.tocsc(), k=k, sigma=1e-3 * norm, return_eigenvectors=False
        )
    except spla.ArpackNoConvergence:
        logger.warning("shift-invert did not converge; null space of L not checked")
        return None
    return int(np.sum(np.abs(eigenvalues) <= max(tol, _NULL_TOL) * norm))


def _solve_sparse(liouvillian: Liouvillian, tol: float) -> DensityMatrix:
    nullity = _sparse_nullity(liouvillian.total, tol)
    if nullity is not None and nullity > 1:
        raise AmbiguousSteadyStateError(nullity)
    bordered, rhs = _bordered_system(liouvillian.total)
    try:
        lu = spla.splu(bordered.tocsc())
    except RuntimeError as e:
        # singular bordered system: the null space of L is not one-dimensional
        raise AmbiguousSteadyStateError(nullity) from e
    return _finish(liouvillian, lu.solve(rhs), "sparse-direct")


def _step_bound(sup: SuperOperator, max_step: Optional[float]) -> float:
    norm = sup.norm()
    h = 2.5 / norm if norm > 0 else math.inf
    if max_step is not None:
        h = min(h, max_step)
    return h


def _rk4_step(matrix: sp.csr_matrix, x: np.ndarray, h: float) -> np.ndarray:
    k1 = matrix @ x
    k2 = matrix @ (x + 0.5 * h * k1)
    k3 = matrix @ (x + 0.5 * h * k2)
    k4 = matrix @ (x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _evolve_to_stationary(
    liouvillian: Liouvillian, tol: float, max_steps: int, start: Optional[DensityMatrix] = None
) -> DensityMatrix:
    sup = liouvillian.total
    bound = tol * sup.norm()
    h = _step_bound(sup, None)
    slowest = min(c.rate for c, _ in liouvillian.channel_parts)
    chunk = max(1, int(math.ceil((1.0 / slowest) / h)))
    x = vec((start or DensityMatrix.maximally_mixed(liouvillian.dim)).data).astype(complex)
    steps = 0
    residual = math.inf
    while steps < max_steps:
        for _ in range(chunk):
            x = _rk4_step(sup.matrix, x, h)
        steps += chunk
        x = x / np.trace(unvec(x, liouvillian.dim))
        residual = float(np.linalg.norm(sup.matrix @ x))
        logger.debug("evolve-to-stationary: %d steps, residual %.3e", steps, residual)
        if residual <= bound:
            return _finish(liouvillian, x, "evolve")
    raise ConvergenceError(
        f"evolve-to-stationary did not reach residual {bound:.3e} in {max_steps} steps", residual
    )


def steady_state(
    liouvillian: Liouvillian,
    method: str = "auto",
    tol: Optional[float] = None,
    options: Optional[SolverOptions] = None,
) -> DensityMatrix:
    """
    Unique stationary state of the generator.

    The trace condition replaces one row of the vectorized generator and the
    bordered system is solved directly: densely (with a singular-value check
    for degeneracy) or with a sparse LU factorization (after a shift-invert
    eigenvalue count near zero). ``auto`` picks dense up
    to ``options.dense_limit`` and falls back to integration when a direct
    solution misses the residual bound.

    Args:
        liouvillian: Assembled generator
        method: auto, dense-null, sparse-direct or evolve
        tol: Relative residual bound; defaults to ``options.tol``
        options: Solver options

    Returns:
        Stationary density matrix with ``||L rho|| <= tol * ||L||``

    Raises:
        AmbiguousSteadyStateError: If the null space has dimension > 1
        ConvergenceError: If the residual bound is not met
    """
    options = options or SolverOptions()
    tol = options.tol if tol is None else tol
    chosen = SteadyStateMethod(method)
    if chosen == SteadyStateMethod.AUTO:
        direct = (
            SteadyStateMethod.DENSE_NULL
            if liouvillian.dim <= options.dense_limit
            else SteadyStateMethod.SPARSE_DIRECT
        )
    else:
        direct = chosen

    bound = tol * liouvillian.total.norm()
    if direct == SteadyStateMethod.EVOLVE:
        return _evolve_to_stationary(liouvillian, tol, options.max_steps)
    if direct == SteadyStateMethod.DENSE_NULL:
        rho = _solve_dense(liouvillian, tol)
    else:
        rho = _solve_sparse(liouvillian, tol)

    residual = liouvillian.residual(rho)
    logger.debug("%s steady state: residual %.3e (bound %.3e)", direct.value, residual, bound)
    if residual <= bound:
        return rho
    if chosen == SteadyStateMethod.AUTO:
        logger.warning(
            "%s residual %.3e exceeds %.3e; refining by integration", direct.value, residual, bound
        )
        return _evolve_to_stationary(liouvillian, tol, options.max_steps, start=rho)
    raise ConvergenceError(
        f"{direct.value} residual {residual:.3e} exceeds bound {bound:.3e}", residual
    )


def evolve(
    liouvillian: Liouvillian,
    rho0: DensityMatrix,
    t_grid: Sequence[float],
    max_step: Optional[float] = None,
    min_step: float = 1e-7,
    max_steps: int = 10_000_000,
) -> List[DensityMatrix]:
    """
    Integrate the master equation with classical fourth-order Runge-Kutta.

    Each grid interval is split into equal substeps no longer than
    ``min(max_step, 2.5/||L||)``. The first grid point is the time of ``rho0``.

    Args:
        liouvillian: Assembled generator
        rho0: Initial state
        t_grid: Increasing sample times
        max_step: Optional cap on the substep
        min_step: Smallest admissible substep bound
        max_steps: Cap on the total number of substeps

    Returns:
        States at each grid time

    Raises:
        StiffnessError: If the step bound falls below ``min_step`` or the step cap is hit
    """
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("t_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(times) < 0):
        raise ValueError("t_grid must be increasing")

    sup = liouvillian.total
    h_max = _step_bound(sup, max_step)
    if h_max < min_step:
        raise StiffnessError(
            f"step bound {h_max:.3e} is below the minimum step {min_step:.1e} "
            f"(generator norm {sup.norm():.3e})"
        )

    x = vec(rho0.data).astype(complex)
    states = [rho0]
    total_steps = 0
    for t_prev, t_next in zip(times[:-1], times[1:]):
        span = t_next - t_prev
        if span > 0:
            m = int(math.ceil(span / h_max))
            total_steps += m
            if total_steps > max_steps:
                raise StiffnessError(f"more than {max_steps} substeps needed to reach t={t_next:g}")
            h = span / m
            for _ in range(m):
                x = _rk4_step(sup.matrix, x, h)
        drift = abs(np.trace(unvec(x, liouvillian.dim)) - 1.0)
        if drift > 1e-9 * max(1.0, t_next - times[0]):
            logger.warning("trace drift %.3e at t=%g", drift, t_next)
        try:
            states.append(DensityMatrix.from_array(unvec(x, liouvillian.dim)))
        except NumericalFailureError as e:
            raise StiffnessError(f"integration lost positivity at t={t_next:g}: {e}") from e
    return states


@dataclass(frozen=True, eq=False)
class ShiftedForm:
    """
    Generator rewritten with displaced cavity jumps.

    ``h_s`` and ``ls_parts`` replace the Hamiltonian and the accessible cavity
    dissipators; ``other_parts`` (inaccessible cavity and intra channels) are
    unchanged.
    """

    alpha: complex
    h_s: Operator
    ls_parts: Tuple[Tuple[BathChannel, SuperOperator], ...]
    other_parts: Tuple[Tuple[BathChannel, SuperOperator], ...]

    def generator(self) -> SuperOperator:
        total = commutator_super(self.h_s)
        for _, sup in self.ls_parts + self.other_parts:
            total = total + sup
        return total

    def action_residual(self, liouvillian: Liouvillian, states: Sequence[DensityMatrix]) -> float:
        """Largest difference between shifted and unshifted generator actions."""
        shifted = self.generator()
        worst = 0.0
        for rho in states:
            diff = shifted.apply(rho) - liouvillian.total.apply(rho)
            worst = max(worst, float(np.max(np.abs(diff))))
        return worst


def shifted_form(liouvillian: Liouvillian, model: ModelSpec, rho: DensityMatrix) -> ShiftedForm:
    """
    Move the coherent part of every accessible cavity channel into the Hamiltonian.

    ``alpha = <a>`` is taken from ``rho``; each accessible channel gets
    ``kappa n D[a^dagger - conj(alpha)] + kappa (n+1) D[a - alpha]`` and the
    Hamiltonian picks up ``(i/2) kappa (conj(alpha) a - alpha a^dagger)``.
    """
    ops = model_operators(model)
    a = np.asarray(ops.a)
    a_dag = a.conj().T
    alpha = expectation(a, rho)
    eye = identity(model.dim)

    h_s = np.array(ops.h_rot)
    ls_parts = []
    other_parts = []
    for channel, sup in liouvillian.channel_parts:
        if channel.kind != ChannelKind.CAVITY_ACCESSIBLE:
            other_parts.append((channel, sup))
            continue
        kappa = channel.rate
        h_s = h_s + 0.5j * kappa * (np.conj(alpha) * a - alpha * a_dag)
        shifted = (kappa * (channel.occupation + 1.0)) * dissipator_super(a - alpha * eye)
        if channel.occupation > 0:
            shifted = shifted + (kappa * channel.occupation) * dissipator_super(
                a_dag - np.conj(alpha) * eye
            )
        ls_parts.append((channel, shifted))
    h_s = 0.5 * (h_s + h_s.conj().T)
    return ShiftedForm(alpha, h_s, tuple(ls_parts), tuple(other_parts))


@dataclass(frozen=True)
class TruncationReport:
    """Population held in the top Fock levels."""

    tail_mass: float
    top_levels: int
    p_top: float

    @property
    def status(self) -> str:
        if self.tail_mass > TAIL_ERROR:
            return "error"
        if self.tail_mass > TAIL_WARN:
            return "warning"
        return "ok"


def truncation_report(
    rho: DensityMatrix, model: ModelSpec, strict: bool = True
) -> TruncationReport:
    """
    Measure the population in the top 10% of the Fock levels.

    Args:
        rho: State on the full space
        model: Model the state belongs to
        strict: Raise when the tail mass exceeds 1e-3

    Returns:
        TruncationReport

    Raises:
        TruncationError: If strict and the tail mass exceeds 1e-3
    """
    n_max = model.n_max
    top = max(1, int(math.ceil(0.1 * n_max)))
    diag = np.real(np.diag(rho.data)).reshape(n_max, model.intra.dim).sum(axis=1)
    report = TruncationReport(
        tail_mass=float(max(0.0, diag[-top:].sum())),
        top_levels=top,
        p_top=float(max(0.0, diag[-1])),
    )
    if report.status == "error":
        message = (
            f"tail mass {report.tail_mass:.3e} in the top {top} of {n_max} Fock levels "
            f"exceeds {TAIL_ERROR:.0e}; increase n_max"
        )
        if strict:
            raise TruncationError(message, report.tail_mass)
        logger.warning(message)
    elif report.status == "warning":
        logger.warning(
            "tail mass %.3e in the top %d of %d Fock levels exceeds %.0e",
            report.tail_mass,
            top,
            n_max,
            TAIL_WARN,
        )
    return report
