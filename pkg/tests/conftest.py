import pytest

from lcmspectra import SpectralParams, build_table


@pytest.fixture(scope="session")
def params_rho1():
    return SpectralParams(0.25, 1.5)


@pytest.fixture(scope="session")
def table_small(params_rho1):
    """Cheap table for product-formula tests."""
    return build_table(params_rho1, 2_000)


@pytest.fixture(scope="session")
def table_counting(params_rho1):
    """Full-coverage table shared by counting, finite-section and Beurling tests."""
    return build_table(params_rho1, 100_000)
