"""
Pytest configuration and shared fixtures for thermoporo tests
"""

import logging

import pytest
from dotenv import load_dotenv

from thermoporo.cartesian import compute_coefficients
from thermoporo.config import RunConfig, parse_config
from thermoporo.numerics import Grid1D
from thermoporo.parameters import DimensionalParams, NondimGroups, nondimensionalize

from tests.factories import ParamsFactory

# Load environment variables (THERMOPORO_* from a local .env, if any)
load_dotenv()


@pytest.fixture(autouse=True)
def reset_settings():
    """Reset settings cache between tests"""
    from thermoporo.config import get_settings

    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Undo configure_logging so caplog sees package records in every test"""
    yield
    root = logging.getLogger("thermoporo")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(logging.NOTSET)
    root.propagate = True


# ============================================================================
# Parameter fixtures
# ============================================================================


@pytest.fixture
def default_params() -> DimensionalParams:
    """Provide the tabulated default material parameters"""
    return DimensionalParams()


@pytest.fixture
def default_groups(default_params) -> NondimGroups:
    """Provide the dimensionless groups of the default parameters"""
    return nondimensionalize(default_params)


@pytest.fixture
def default_coefficients(default_groups):
    """Provide closed-form Cartesian coefficients for Xi = 0"""
    return compute_coefficients(default_groups, Xi=0)


@pytest.fixture
def coupled_coefficients(default_groups):
    """Provide closed-form Cartesian coefficients for Xi = 1"""
    return compute_coefficients(default_groups, Xi=1)


@pytest.fixture
def unit_grid() -> Grid1D:
    """Provide the default 201-node grid on [0, 1]"""
    return Grid1D(0.0, 1.0, 201)


# ============================================================================
# Configuration fixtures
# ============================================================================


@pytest.fixture
def run_config(tmp_path) -> RunConfig:
    """Provide a default run configuration writing into a temporary directory"""
    return parse_config(None, [f"output.directory={tmp_path / 'out'}"])


@pytest.fixture
def config_file(tmp_path):
    """Write a small sectioned config file and return its path"""
    path = tmp_path / "run.ini"
    path.write_text(
        "# test configuration\n"
        "[dimensional]\n"
        "kappa_s = 3.0\n"
        "phi_f = 0.3\n"
        "\n"
        "[solver]\n"
        "grid_nodes = 101\n"
        "\n"
        "[output]\n"
        f"directory = {tmp_path / 'out'}\n",
        encoding="utf-8",
    )
    return path


# ============================================================================
# Factory class fixtures for direct use in tests
# ============================================================================


@pytest.fixture
def params_factory():
    """Provide ParamsFactory class for building parameter sets in tests."""
    return ParamsFactory
