import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("sicprop", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("sicprop")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (m + m.conj().T)
