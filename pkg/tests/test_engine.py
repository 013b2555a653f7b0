"""Tests for the object-oriented engine."""

import numpy as np
import pytest

from cavity_thermo import CavityEngine
from cavity_thermo.config import EvolveConfig, SweepConfig, config_from_text, load_config
from cavity_thermo.errors import TruncationError
from cavity_thermo.io import read_state
from cavity_thermo.models import preset
from cavity_thermo.solver import SolverOptions, SteadyStateMethod


@pytest.fixture
def engine():
    return CavityEngine.from_preset("empty", {"n_max": 12})


class TestCavityEngine:
    """Test the stateful engine."""

    def test_solves_once(self, engine):
        """Test that the steady state is cached."""
        first = engine.steady_state()
        assert engine.steady_state() is first
        assert engine.liouvillian is engine.liouvillian

    def test_report(self, engine):
        """Test the report of the steady state."""
        report = engine.report()
        assert report.P_conv > 0
        assert report.Sigma_conv > report.Sigma_io

    def test_audit(self):
        """Test that the audit reuses the solved state."""
        engine = CavityEngine(preset("empty"))
        engine.steady_state()
        assert engine.audit(seed=1).passed

    def test_audit_without_state(self):
        """Test that an unsolvable model audits as failed instead of raising."""
        engine = CavityEngine(preset("empty"), SolverOptions(max_dim=4))
        assert not engine.audit().passed

    def test_truncation(self):
        """Test that a leaking steady state is refused."""
        engine = CavityEngine.from_preset("empty", {"n_max": 8, "drive.amplitude": 2.0})
        with pytest.raises(TruncationError):
            engine.steady_state()

    def test_with_parameter(self, engine):
        """Test that a changed parameter gives a fresh engine."""
        other = engine.with_parameter("drive.delta", 1.0)
        assert other is not engine
        assert other.model.delta == pytest.approx(1.0)
        assert engine.model.delta == 0.0
        assert other.options is engine.options
        assert other.report().P_conv < engine.report().P_conv

    def test_sweep(self, engine):
        """Test a sweep around the engine's model."""
        table = engine.sweep(SweepConfig("drive.delta", [0.0, 1.0]))
        assert len(table.rows) == 2
        assert table.rows[0]["P_conv"] == pytest.approx(engine.report().P_conv, rel=1e-9)

    def test_evolve(self, engine):
        """Test a short trajectory."""
        table = engine.evolve(EvolveConfig(t_end=0.1, samples=2))
        assert [row["t"] for row in table.rows] == [0.0, 0.1]


class TestEngineFiles:
    """Test saving and loading."""

    def test_config_round_trip(self, engine, tmp_path):
        """Test that a saved configuration rebuilds the same engine."""
        engine.options = SolverOptions(method="dense-null")
        path = tmp_path / "engine.ini"
        engine.save_config(path)
        loaded = CavityEngine.from_config(path)
        assert loaded.model == engine.model
        assert loaded.options.method == SteadyStateMethod.DENSE_NULL

    def test_describe(self, engine):
        """Test that the description parses back to the model."""
        text = engine.describe()
        assert text.startswith("[model]")
        assert config_from_text(text).model == engine.model

    def test_save_state(self, engine, tmp_path):
        """Test that the steady state is written to disk."""
        path = tmp_path / "rho.npy"
        engine.save_state(path)
        loaded = read_state(path, expected_dim=engine.model.dim)
        assert np.array_equal(loaded.data, engine.steady_state().data)

    def test_reload(self, engine, empty_config_file):
        """Test that reloading replaces the model and drops the cached state."""
        before = engine.steady_state()
        engine.reload(empty_config_file)
        assert engine.model.n_max == 16
        assert engine.steady_state() is not before
        assert engine.steady_state().dim == 16

    def test_from_run_config(self, empty_config_file):
        """Test construction from a resolved configuration."""
        engine = CavityEngine.from_run_config(load_config(empty_config_file))
        assert engine.model.drive.amplitude_f == 0.2
