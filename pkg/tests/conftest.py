import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: optimizer sweeps that take minutes")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(1234)
