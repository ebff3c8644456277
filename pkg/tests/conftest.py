import numpy as np
import pytest


def random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2.0


def random_density(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def trace_distance(a, b):
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


@pytest.fixture(scope="session")
def channel_m2n1():
    from fockshadow import build_measurement_channel

    return build_measurement_channel(2, 1)


@pytest.fixture(scope="session")
def channel_m2n2():
    from fockshadow import build_measurement_channel

    return build_measurement_channel(2, 2)


@pytest.fixture(scope="session")
def channel_m3n2():
    from fockshadow import build_measurement_channel

    return build_measurement_channel(3, 2)
