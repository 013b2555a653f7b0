"""Tests for generator assembly, steady states and time evolution."""

import numpy as np
import pytest

from cavity_thermo.audit import analytic_empty_cavity
from cavity_thermo.errors import (
    AmbiguousSteadyStateError,
    DimensionOverflowError,
    StiffnessError,
    TruncationError,
)
from cavity_thermo.linalg import DensityMatrix, expectation, random_density_matrix
from cavity_thermo.models import (
    BathChannel,
    ChannelKind,
    DriveSpec,
    IntraSystem,
    IntraVariant,
    ModelSpec,
    model_operators,
    preset,
)
from cavity_thermo.solver import (
    SolverOptions,
    assemble,
    evolve,
    shifted_form,
    steady_state,
    truncation_report,
)


def _a_mean(model, rho):
    return expectation(np.asarray(model_operators(model).a), rho)


class TestAssembly:
    """Test the assembled generator."""

    def test_decomposition(self, kerr_solved):
        """Test that the generator is the sum of its parts."""
        liouvillian, _ = kerr_solved
        assert liouvillian.decomposition_residual() < 1e-12 * liouvillian.total.norm()
        assert [c.label for c, _ in liouvillian.channel_parts] == ["cavity"]

    def test_trace_preserving(self, tls_solved):
        """Test that the adjoint generator annihilates the identity."""
        liouvillian, _ = tls_solved
        assert liouvillian.total.trace_residual() < 1e-10 * liouvillian.total.norm()

    def test_dimension_limit(self):
        """Test that oversized models are refused before assembly."""
        with pytest.raises(DimensionOverflowError, match="limit"):
            assemble(preset("maser"), SolverOptions(max_dim=100))

    def test_part_lookup(self, tls_solved):
        """Test access to a channel part by label."""
        liouvillian, _ = tls_solved
        assert liouvillian.part("tls").dim == liouvillian.dim
        with pytest.raises(KeyError):
            liouvillian.part("missing")


class TestSteadyState:
    """Test the stationary-state solvers."""

    @pytest.mark.parametrize("delta", [-5.0, -2.0, 0.0, 0.5, 3.0])
    def test_empty_cavity_oracle(self, delta):
        """Test the coherent amplitude against the untruncated closed form."""
        model = preset("empty", {"n_max": 40, "drive.delta": delta, "drive.amplitude": 0.3 + 0.1j})
        rho = steady_state(assemble(model))
        oracle = analytic_empty_cavity(1.0, 0.3 + 0.1j, delta, 0.5, model.drive.omega_d)
        assert _a_mean(model, rho) == pytest.approx(oracle.a_mean, abs=1e-9)

    def test_residual_bound(self, kerr_solved):
        """Test that the solution meets the residual bound."""
        liouvillian, rho = kerr_solved
        assert liouvillian.residual(rho) <= 1e-10 * liouvillian.total.norm()

    @pytest.mark.parametrize("method", ["dense-null", "sparse-direct", "evolve"])
    def test_methods_agree(self, method):
        """Test that every method finds the same state."""
        model = preset("kerr", {"n_max": 14, "drive.amplitude": 0.5})
        liouvillian = assemble(model)
        reference = steady_state(liouvillian, "sparse-direct")
        rho = steady_state(liouvillian, method)
        assert np.max(np.abs(rho.data - reference.data)) < 1e-6

    @pytest.mark.parametrize(
        "n_max, method", [(6, "dense-null"), (20, "sparse-direct"), (40, "auto")]
    )
    def test_ambiguous_steady_state(self, n_max, method):
        """Test that a decoupled two-level system without a bath is detected."""
        model = ModelSpec(
            1e4,
            n_max,
            DriveSpec(0.1, 1e4),
            IntraSystem(IntraVariant.TLS, omega_q=1e4, g=0.0),
            (BathChannel("cavity", ChannelKind.CAVITY_ACCESSIBLE, 1.0, 0.1),),
        )
        with pytest.raises(AmbiguousSteadyStateError) as exc_info:
            steady_state(assemble(model), method)
        assert exc_info.value.nullity >= 2
        assert "null space has dimension" in str(exc_info.value)

    def test_auto_uses_sparse_above_dense_limit(self, kerr_solved):
        """Test that auto above the dense limit matches a forced dense solve."""
        liouvillian, _ = kerr_solved
        rho = steady_state(liouvillian, options=SolverOptions(dense_limit=16))
        dense = steady_state(liouvillian, "dense-null")
        assert np.max(np.abs(rho.data - dense.data)) < 1e-8


class TestEvolve:
    """Test the Runge-Kutta integrator."""

    def test_relaxes_to_steady_state(self, empty_model, empty_solved):
        """Test that a long run ends at the stationary state."""
        liouvillian, rho_ss = empty_solved
        start = DensityMatrix.maximally_mixed(empty_model.dim)
        states = evolve(liouvillian, start, [0.0, 60.0])
        assert np.max(np.abs(states[-1].data - rho_ss.data)) < 1e-9

    def test_returns_one_state_per_time(self, empty_solved):
        """Test the sampling of the grid."""
        liouvillian, rho_ss = empty_solved
        states = evolve(liouvillian, rho_ss, np.linspace(0.0, 1.0, 5))
        assert len(states) == 5
        assert states[0] is rho_ss

    def test_steady_state_is_stationary(self, kerr_solved):
        """Test that evolving the steady state leaves it unchanged."""
        liouvillian, rho = kerr_solved
        states = evolve(liouvillian, rho, [0.0, 0.5])
        assert np.max(np.abs(states[-1].data - rho.data)) < 1e-9

    def test_rejects_decreasing_grid(self, empty_solved):
        """Test that the time grid must increase."""
        liouvillian, rho = empty_solved
        with pytest.raises(ValueError, match="increasing"):
            evolve(liouvillian, rho, [0.0, 1.0, 0.5])

    def test_stiffness(self, empty_solved):
        """Test that a step bound below the minimum step is refused."""
        liouvillian, rho = empty_solved
        with pytest.raises(StiffnessError):
            evolve(liouvillian, rho, [0.0, 1.0], min_step=1.0)

    def test_step_cap(self, empty_solved):
        """Test that the substep cap is enforced."""
        liouvillian, rho = empty_solved
        with pytest.raises(StiffnessError, match="substeps"):
            evolve(liouvillian, rho, [0.0, 10.0], max_step=1e-3, max_steps=100)


class TestShiftedForm:
    """Test the displaced-jump rewrite of the generator."""

    def test_action_identity(self, kerr_model, kerr_solved, rng):
        """Test that both forms generate the same dynamics."""
        liouvillian, rho = kerr_solved
        shifted = shifted_form(liouvillian, kerr_model, rho)
        states = [random_density_matrix(kerr_model.dim, rng) for _ in range(5)]
        assert shifted.action_residual(liouvillian, states) < 1e-10 * liouvillian.total.norm()

    def test_alpha_is_field_mean(self, kerr_model, kerr_solved):
        """Test that the shift is the coherent amplitude of the state."""
        liouvillian, rho = kerr_solved
        shifted = shifted_form(liouvillian, kerr_model, rho)
        assert shifted.alpha == pytest.approx(_a_mean(kerr_model, rho))
        assert [c.label for c, _ in shifted.ls_parts] == ["cavity"]
        assert shifted.other_parts == ()

    def test_inaccessible_channel_is_unchanged(self):
        """Test that only accessible channels are displaced."""
        model = preset("empty", {"n_max": 10})
        loss = BathChannel("loss", ChannelKind.CAVITY_INACCESSIBLE, 0.5, 0.2)
        channels = model.channels + (loss,)
        model = ModelSpec(model.omega_cavity, 10, model.drive, model.intra, channels)
        liouvillian = assemble(model)
        rho = steady_state(liouvillian)
        shifted = shifted_form(liouvillian, model, rho)
        assert [c.label for c, _ in shifted.other_parts] == ["loss"]
        assert shifted.other_parts[0][1] is liouvillian.part("loss")


class TestTruncation:
    """Test the Fock-space tail monitor."""

    def test_converged_state(self, empty_model, empty_solved):
        """Test a well-truncated state."""
        _, rho = empty_solved
        report = truncation_report(rho, empty_model)
        assert report.status == "ok"
        assert report.top_levels == 2

    def test_strong_drive_raises(self):
        """Test that a leaking state raises in strict mode."""
        model = preset("empty", {"n_max": 8, "drive.amplitude": 2.0})
        rho = steady_state(assemble(model))
        with pytest.raises(TruncationError) as exc_info:
            truncation_report(rho, model)
        assert exc_info.value.tail_mass > 1e-3

    def test_lenient_mode(self):
        """Test that non-strict mode reports instead of raising."""
        model = preset("empty", {"n_max": 8, "drive.amplitude": 2.0})
        rho = steady_state(assemble(model))
        assert truncation_report(rho, model, strict=False).status == "error"
