"""Shared fixtures: small reference models and their steady states."""

import numpy as np
import pytest

from cavity_thermo import assemble, preset, steady_state


@pytest.fixture(scope="session")
def empty_model():
    """Driven empty cavity at n_c = 0.5 and n_max = 40."""
    return preset("empty")


@pytest.fixture(scope="session")
def kerr_model():
    """Kerr cavity detuned by one linewidth."""
    return preset("kerr", {"drive.delta": 1.0})


@pytest.fixture(scope="session")
def tls_model():
    """Cavity coupled to a two-level system with its own bath."""
    return preset("tls", {"n_max": 12})


@pytest.fixture(scope="session")
def empty_solved(empty_model):
    liouvillian = assemble(empty_model)
    return liouvillian, steady_state(liouvillian)


@pytest.fixture(scope="session")
def kerr_solved(kerr_model):
    liouvillian = assemble(kerr_model)
    return liouvillian, steady_state(liouvillian)


@pytest.fixture(scope="session")
def tls_solved(tls_model):
    liouvillian = assemble(tls_model)
    return liouvillian, steady_state(liouvillian)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


EMPTY_CONFIG = """\
[model]
preset = empty
n_max = 16

[drive]
amplitude = 0.2
delta = 0.5

[channel cavity]
occupation = 0.3
"""


@pytest.fixture
def empty_config_file(tmp_path):
    path = tmp_path / "empty.ini"
    path.write_text(EMPTY_CONFIG)
    return path
