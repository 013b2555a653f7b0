"""Tests for run configuration files."""

import pytest

from cavity_thermo.config import (
    EvolveConfig,
    SweepConfig,
    config_from_text,
    config_to_text,
    load_config,
)
from cavity_thermo.errors import ConfigError, ThermoFileError
from cavity_thermo.models import IntraVariant, preset
from cavity_thermo.solver import SolverOptions, SteadyStateMethod


class TestConfigFromText:
    """Test resolution of configuration text into a run."""

    def test_preset_with_overrides(self, empty_config_file):
        """Test that sections override the preset."""
        config = load_config(empty_config_file)
        model = config.model
        assert model.n_max == 16
        assert model.drive.amplitude_f == 0.2
        assert model.delta == pytest.approx(0.5)
        assert model.channel("cavity").occupation == 0.3
        assert model.channel("cavity").rate == 1.0
        assert config.sweep is None
        assert config.evolve is None

    def test_full_description(self):
        """Test a model given without a preset."""
        text = """\
[model]
omega_cavity = 100
n_max = 10

[drive]
amplitude = 0.1+0.1j
omega_d = 99

[channel cavity]
rate = 2
occupation = 0.2

[channel loss]
kind = cavity-inaccessible
rate = 0.5
"""
        model = config_from_text(text).model
        assert model.omega_cavity == 100.0
        assert model.drive.amplitude_f == 0.1 + 0.1j
        assert model.intra.variant == IntraVariant.NONE
        assert [c.label for c in model.channels] == ["cavity", "loss"]
        assert model.channel("loss").occupation == 0.0
        assert model.channel("cavity").jumps == ("cavity",)

    def test_changing_variant_drops_preset_intra(self):
        """Test that a new intra variant starts from its own defaults."""
        text = "[model]\npreset = kerr\n\n[intra]\nvariant = none\n"
        assert config_from_text(text).model.intra.variant == IntraVariant.NONE

    def test_delta_and_omega_d_conflict(self):
        """Test that the drive frequency is given one way only."""
        text = "[model]\npreset = empty\n\n[drive]\nomega_d = 1e4\ndelta = 1\n"
        with pytest.raises(ConfigError, match="not both"):
            config_from_text(text)

    def test_delta_needs_cavity_frequency(self):
        """Test that delta cannot resolve without omega_cavity."""
        text = "[model]\nn_max = 4\n\n[drive]\ndelta = 1\n"
        with pytest.raises(ConfigError, match="omega_cavity"):
            config_from_text(text)

    def test_unknown_key(self):
        """Test that a misspelled key is reported at its line."""
        with pytest.raises(ConfigError) as exc_info:
            config_from_text("[model]\npreset = empty\nnmax = 3\n")
        assert exc_info.value.line == 3
        assert exc_info.value.field == "nmax"

    def test_unknown_section(self):
        """Test that an unknown section is reported at its header."""
        with pytest.raises(ConfigError, match="unknown section") as exc_info:
            config_from_text("[model]\npreset = empty\n\n[modle]\nn_max = 3\n")
        assert exc_info.value.line == 4

    def test_unknown_preset(self):
        """Test that the preset must exist."""
        with pytest.raises(ConfigError, match="allowed values"):
            config_from_text("[model]\npreset = laser\n")

    def test_needs_model(self):
        """Test that a configuration must describe a model."""
        with pytest.raises(ConfigError, match="model"):
            config_from_text("[solver]\ntol = 1e-9\n")

    def test_invalid_model(self):
        """Test that model validation errors become configuration errors."""
        with pytest.raises(ConfigError, match="invalid model") as exc_info:
            config_from_text("[model]\npreset = empty\n\n[channel cavity]\nrate = 0\n")
        assert exc_info.value.line == 1

    def test_units(self):
        """Test that a unit scale multiplies rates and frequencies."""
        config = config_from_text("[model]\npreset = empty\n\n[units]\nscale = 4\n")
        assert config.scale == 4.0
        assert config.model.omega_cavity == 4e4
        assert config.model.channel("cavity").rate == 4.0
        assert config.model.drive.amplitude_f == pytest.approx(0.2)

    def test_units_must_be_positive(self):
        """Test that a zero or infinite scale is rejected."""
        for scale in ("0", "inf"):
            with pytest.raises(ConfigError, match="custom validation"):
                config_from_text(f"[model]\npreset = empty\n\n[units]\nscale = {scale}\n")

    def test_solver(self):
        """Test solver options."""
        text = "[model]\npreset = empty\n\n[solver]\nmethod = dense-null\ntol = 1e-9\n"
        config = config_from_text(text)
        assert config.solver.method == SteadyStateMethod.DENSE_NULL
        assert config.solver.tol == 1e-9
        assert config.solver.max_dim == SolverOptions().max_dim

    def test_missing_file(self, tmp_path):
        """Test that a missing file is a file error."""
        with pytest.raises(ThermoFileError):
            load_config(tmp_path / "missing.ini")


class TestSweepSection:
    """Test the [sweep] section."""

    def test_linear(self):
        """Test evenly spaced values."""
        text = (
            "[model]\npreset = empty\n\n"
            "[sweep]\nparameter = drive.delta\nstart = -1\nstop = 1\ncount = 5\n"
        )
        sweep = config_from_text(text).sweep
        assert sweep.parameter == "drive.delta"
        assert sweep.values == [-1.0, -0.5, 0.0, 0.5, 1.0]

    def test_explicit_values_and_series(self):
        """Test explicit values, a series and output columns."""
        text = """\
[model]
preset = kerr

[sweep]
parameter = drive.delta
values = -1, 0, 2
series = channels.cavity.occupation
series_values = 0.1, 0.5
outputs = P_conv, Sigma_io
output = kerr.csv
"""
        sweep = config_from_text(text).sweep
        assert sweep.values == [-1.0, 0.0, 2.0]
        assert sweep.series_values == [0.1, 0.5]
        assert sweep.outputs == ["P_conv", "Sigma_io"]
        assert sweep.output == "kerr.csv"

    def test_parameter_path(self):
        """Test that the swept parameter must be a dot path."""
        text = "[model]\npreset = empty\n\n[sweep]\nparameter = drive delta\nvalues = 0\n"
        with pytest.raises(ConfigError, match="pattern") as exc_info:
            config_from_text(text)
        assert exc_info.value.field == "parameter"

    def test_values_or_range(self):
        """Test that values and a range exclude each other."""
        text = "[model]\npreset = empty\n\n[sweep]\nparameter = n_max\nvalues = 4, 5\ncount = 2\n"
        with pytest.raises(ConfigError, match="either"):
            config_from_text(text)

    def test_incomplete_range(self):
        """Test that a range needs start, stop and count."""
        text = "[model]\npreset = empty\n\n[sweep]\nparameter = n_max\nstart = 4\n"
        with pytest.raises(ConfigError) as exc_info:
            config_from_text(text)
        assert exc_info.value.field == "stop"

    def test_sweep_config_validation(self):
        """Test the dataclass checks."""
        with pytest.raises(ConfigError):
            SweepConfig("drive.delta", [])
        with pytest.raises(ConfigError, match="series_values"):
            SweepConfig("drive.delta", [0.0], series="n_max")
        assert SweepConfig.linear("x", 0.0, 1.0, 1).values == [0.0]


class TestEvolveSection:
    """Test the [evolve] section."""

    def test_coherent(self):
        """Test a coherent initial state and the time grid."""
        text = (
            "[model]\npreset = empty\n\n"
            "[evolve]\ninitial = coherent\nalpha = 1+0.5j\nt_end = 2\nsamples = 5\n"
        )
        evolve = config_from_text(text).evolve
        assert evolve.alpha == 1 + 0.5j
        assert list(evolve.t_grid()) == [0.0, 0.5, 1.0, 1.5, 2.0]

    def test_file_needs_path(self):
        """Test that a file initial state needs a path."""
        with pytest.raises(ConfigError, match="state_file"):
            EvolveConfig(initial="file")

    def test_unknown_initial(self):
        """Test that the initial state name is checked."""
        with pytest.raises(ConfigError):
            EvolveConfig(initial="squeezed")

    def test_samples(self):
        """Test that a trajectory needs two samples."""
        with pytest.raises(ConfigError):
            config_from_text("[model]\npreset = empty\n\n[evolve]\nsamples = 1\n")


class TestConfigRoundTrip:
    """Test that written configurations reproduce their model."""

    @pytest.mark.parametrize("name", ["empty", "kerr", "tls", "maser"])
    def test_presets(self, name):
        """Test every reference model."""
        model = preset(name, {"drive.delta": 0.25})
        assert config_from_text(config_to_text(model)).model == model

    def test_solver_options(self):
        """Test that solver options are written too."""
        options = SolverOptions(method="sparse-direct", tol=1e-8, max_dim=64)
        config = config_from_text(config_to_text(preset("empty"), options))
        assert config.solver.method == SteadyStateMethod.SPARSE_DIRECT
        assert config.solver.tol == 1e-8
        assert config.solver.max_dim == 64

    def test_channel_extras(self):
        """Test optional channel fields."""
        model = preset(
            "empty",
            {
                "channels.cavity.temperature_occupation": 0.5,
                "channels.cavity.reference_frequency": 2e4,
            },
        )
        assert config_from_text(config_to_text(model)).model == model
