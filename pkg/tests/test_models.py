"""Tests for model descriptions, operators and reference states."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavity_thermo.errors import ModelError
from cavity_thermo.linalg import is_hermitian
from cavity_thermo.models import (
    OPERATOR_CACHE_SIZE,
    BathChannel,
    ChannelKind,
    DriveSpec,
    IntraSystem,
    IntraVariant,
    ModelSpec,
    bose_occupation,
    build_channels,
    build_hamiltonian_rotating,
    build_thermo_hamiltonian,
    channel_temperature,
    displaced_gibbs_state,
    fingerprint,
    gibbs_state,
    model_from_dict,
    model_operators,
    model_to_dict,
    occupation_to_temperature,
    preset,
    reference_frequency,
    scale_units,
    with_parameter,
)


def _cavity(occupation=0.5, label="cavity", kind=ChannelKind.CAVITY_ACCESSIBLE):
    return BathChannel(label, kind, 1.0, occupation)


class TestPresets:
    """Test the reference models."""

    @pytest.mark.parametrize(
        "name, dim", [("empty", 20), ("kerr", 30), ("tls", 40), ("maser", 180)]
    )
    def test_dimensions(self, name, dim):
        """Test the Hilbert dimension of each preset."""
        assert preset(name).dim == dim

    def test_unknown_preset(self):
        """Test that an unknown name is rejected."""
        with pytest.raises(ModelError, match="Unknown preset"):
            preset("laser")

    def test_overrides_apply_in_order(self):
        """Test dot-path overrides on a preset."""
        model = preset("kerr", {"n_max": 12, "intra.K": 0.2})
        assert model.n_max == 12
        assert model.intra.K == 0.2

    def test_maser_reference_frequencies(self):
        """Test the hot and cold maser transitions."""
        model = preset("maser")
        assert reference_frequency(model, model.channel("hot")) == pytest.approx(3e4)
        assert reference_frequency(model, model.channel("cold")) == pytest.approx(2e4)
        assert reference_frequency(model, model.channel("cavity")) == pytest.approx(1e4)

    def test_maser_hot_temperature(self):
        """Test that the hot bath temperature is recovered from its occupation."""
        model = preset("maser")
        assert channel_temperature(model, model.channel("hot")) == pytest.approx(1e5, rel=1e-12)


class TestValidation:
    """Test model validation."""

    def test_requires_accessible_channel(self):
        """Test that a model needs a cavity-accessible channel."""
        with pytest.raises(ModelError, match="cavity-accessible"):
            ModelSpec(
                1e4,
                10,
                DriveSpec(0.1, 1e4),
                channels=(_cavity(kind=ChannelKind.CAVITY_INACCESSIBLE),),
            )

    def test_rejects_small_truncation(self):
        """Test that n_max must be at least 2."""
        with pytest.raises(ModelError, match="n_max"):
            ModelSpec(1e4, 1, DriveSpec(0.1, 1e4), channels=(_cavity(),))

    def test_rejects_negative_rate(self):
        """Test that rates must be positive."""
        channel = BathChannel("cavity", ChannelKind.CAVITY_ACCESSIBLE, -1.0, 0.0)
        with pytest.raises(ModelError, match="rate"):
            ModelSpec(1e4, 10, DriveSpec(0.1, 1e4), channels=(channel,))

    def test_rejects_duplicate_labels(self):
        """Test that channel labels are unique."""
        with pytest.raises(ModelError, match="unique"):
            ModelSpec(1e4, 10, DriveSpec(0.1, 1e4), channels=(_cavity(), _cavity()))

    def test_rejects_template_without_intra_system(self):
        """Test that a two-level jump needs a two-level system."""
        tls = BathChannel("tls", ChannelKind.INTRA, 0.1, 0.0, ("tls",))
        with pytest.raises(ModelError, match="needs intra variant"):
            ModelSpec(1e4, 10, DriveSpec(0.1, 1e4), channels=(_cavity(), tls))

    def test_rejects_inverted_maser_levels(self):
        """Test that the maser needs omega_3 > omega_2."""
        with pytest.raises(ModelError, match="omega_3"):
            with_parameter(preset("maser"), "intra.omega_3", 0.5e4)

    def test_rejects_non_finite(self):
        """Test that NaN parameters are rejected."""
        with pytest.raises(ModelError, match="finite"):
            ModelSpec(float("nan"), 10, DriveSpec(0.1, 1e4), channels=(_cavity(),))

    def test_drive_channel_must_be_accessible(self):
        """Test that the drive cannot enter through an inaccessible channel."""
        channels = (_cavity(), _cavity(label="loss", kind=ChannelKind.CAVITY_INACCESSIBLE))
        with pytest.raises(ModelError, match="drive channel"):
            ModelSpec(1e4, 10, DriveSpec(0.1, 1e4, channel="loss"), channels=channels)


class TestOperators:
    """Test Hamiltonians and dissipators."""

    @pytest.mark.parametrize("name", ["empty", "kerr", "tls"])
    def test_hamiltonians_are_hermitian(self, name):
        """Test Hermiticity of both Hamiltonians."""
        model = preset(name, {"n_max": 8, "drive.delta": 0.3})
        assert is_hermitian(build_hamiltonian_rotating(model))
        assert is_hermitian(build_thermo_hamiltonian(model))

    def test_rotating_hamiltonian_entries(self):
        """Test the detuning and drive entries of the empty cavity."""
        model = preset("empty", {"n_max": 5, "drive.delta": 0.7})
        h = build_hamiltonian_rotating(model)
        assert h[2, 2] == pytest.approx(1.4)
        assert h[0, 1] == pytest.approx(0.1j)
        assert h[1, 0] == pytest.approx(-0.1j)

    def test_intra_energy_commutes_with_field(self):
        """Test that the intra part of H_TD commutes with a."""
        model = preset("maser", {"n_max": 6})
        ops = model_operators(model)
        a = np.asarray(ops.a)
        h = np.asarray(ops.h_td_intra)
        assert np.max(np.abs(h @ a - a @ h)) < 1e-9

    def test_operator_cache_is_bounded(self):
        """Test that only a handful of operator sets stay cached during a sweep."""
        for delta in range(3 * OPERATOR_CACHE_SIZE):
            model_operators(preset("maser", {"n_max": 4, "drive.delta": float(delta)}))
        info = model_operators.cache_info()
        assert info.maxsize == OPERATOR_CACHE_SIZE <= 8
        assert info.currsize <= OPERATOR_CACHE_SIZE

    def test_thermo_hamiltonian_of_tls(self):
        """Test H_TD = omega_d (n + sigma_+ sigma_-)."""
        model = preset("tls", {"n_max": 4})
        expected = 1e4 * np.array([0, 1, 1, 2, 2, 3, 3, 4])
        assert np.allclose(np.diag(build_thermo_hamiltonian(model)).real, expected)

    def test_zero_occupation_has_no_raising_term(self):
        """Test that a zero-temperature channel only lowers."""
        model = preset("empty", {"n_max": 4, "channels.cavity.occupation": 0.0})
        [(_, sup)] = build_channels(model)
        vacuum = np.zeros((4, 4), dtype=complex)
        vacuum[0, 0] = 1.0
        assert np.max(np.abs(sup.apply(vacuum))) == 0.0

    def test_far_detuning_warns(self, caplog):
        """Test the rotating-wave warning for a large detuning."""
        model = preset("empty", {"n_max": 4, "drive.delta": 2500.0})
        with caplog.at_level("WARNING", logger="cavity_thermo.models"):
            build_hamiltonian_rotating(model)
        assert "rotating-wave" in caplog.text


class TestReferenceStates:
    """Test Gibbs and displaced Gibbs states."""

    @pytest.mark.parametrize("name", ["empty", "tls"])
    def test_gibbs_is_fixed_point(self, name):
        """Test that every channel annihilates the Gibbs state at its temperature."""
        model = preset(name, {"n_max": 10})
        for channel, sup in build_channels(model):
            sigma = gibbs_state(model, channel_temperature(model, channel))
            assert np.max(np.abs(sup.apply(sigma.state))) < 1e-10

    def test_gibbs_log_is_exact(self):
        """Test the stored logarithm against the populations."""
        model = preset("empty", {"n_max": 6})
        reference = gibbs_state(model, 5000.0)
        populations = np.real(np.diag(reference.state.data))
        assert np.allclose(np.exp(np.diag(reference.log).real), populations)

    def test_zero_temperature_gibbs(self):
        """Test that T = 0 gives the ground state and no logarithm."""
        reference = gibbs_state(preset("empty", {"n_max": 6}), 0.0)
        assert reference.log is None
        assert reference.state.data[0, 0] == pytest.approx(1.0)

    def test_displaced_gibbs_mean(self):
        """Test that the displaced state carries the displacement."""
        model = preset("empty", {"n_max": 20})
        sigma = displaced_gibbs_state(model, 5000.0, 0.3 - 0.2j)
        a = np.asarray(model_operators(model).a)
        assert np.trace(a @ sigma.state.data) == pytest.approx(0.3 - 0.2j, abs=1e-10)


class TestTemperatures:
    """Test the occupation and temperature maps."""

    @settings(max_examples=50, deadline=None)
    @given(n=st.floats(min_value=1e-6, max_value=1e3))
    def test_occupation_round_trip(self, n):
        """Test that the Bose-Einstein map inverts the temperature map."""
        omega = 1e4
        temperature = occupation_to_temperature(n, omega)
        assert bose_occupation(temperature, omega) == pytest.approx(n, rel=1e-9)

    def test_zero_occupation(self):
        """Test that zero occupation means zero temperature."""
        assert occupation_to_temperature(0.0, 1.0) == 0.0
        assert bose_occupation(0.0, 1.0) == 0.0

    def test_negative_occupation(self):
        """Test that negative occupations are rejected."""
        with pytest.raises(ModelError):
            occupation_to_temperature(-0.1, 1.0)

    def test_temperature_occupation_override(self):
        """Test that the temperature occupation decouples from the dissipator."""
        model = preset("empty", {"channels.cavity.temperature_occupation": 1.0})
        channel = model.channel("cavity")
        assert channel.occupation == 0.5
        expected = occupation_to_temperature(1.0, 1e4)
        assert channel_temperature(model, channel) == pytest.approx(expected)


class TestParameters:
    """Test dict forms, overrides and fingerprints."""

    @pytest.mark.parametrize("name", ["empty", "kerr", "tls", "maser"])
    def test_dict_round_trip(self, name):
        """Test that the dict form reconstructs the model."""
        model = preset(name)
        assert model_from_dict(model_to_dict(model)) == model

    def test_delta_path(self):
        """Test the derived drive.delta path."""
        model = with_parameter(preset("empty"), "drive.delta", 2.0)
        assert model.drive.omega_d == pytest.approx(1e4 - 2.0)
        assert model.delta == pytest.approx(2.0)

    def test_temperature_path(self):
        """Test the derived channels.<label>.T path."""
        temperature = occupation_to_temperature(0.25, 1e4)
        model = with_parameter(preset("empty"), "channels.cavity.T", temperature)
        assert model.channel("cavity").occupation == pytest.approx(0.25)

    def test_optional_leaf(self):
        """Test setting a key absent from the dict form."""
        model = with_parameter(preset("empty"), "channels.cavity.input_amplitude", 0.5)
        assert model.channel("cavity").input_amplitude == 0.5

    @pytest.mark.parametrize("path", ["drive.bogus", "channels.nope.T", "intra"])
    def test_unknown_path(self, path):
        """Test that unresolvable paths are rejected."""
        with pytest.raises(ModelError):
            with_parameter(preset("empty"), path, 1.0)

    def test_fingerprint(self):
        """Test that the fingerprint tracks the parameters."""
        model = preset("kerr")
        assert fingerprint(model) == fingerprint(preset("kerr"))
        assert fingerprint(model) != fingerprint(with_parameter(model, "intra.K", 0.06))

    def test_scale_units(self):
        """Test rescaling of frequencies, rates and amplitudes."""
        model = scale_units(preset("empty"), 4.0)
        assert model.omega_cavity == 4e4
        assert model.channel("cavity").rate == 4.0
        assert model.drive.amplitude_f == pytest.approx(0.2)

    def test_intra_defaults(self):
        """Test that unused intra parameters stay at zero."""
        intra = IntraSystem(IntraVariant.KERR, K=0.1)
        assert intra.dim == 1
        assert replace(intra, variant=IntraVariant.TLS).dim == 2
