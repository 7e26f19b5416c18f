import math

import pytest

from src.core.config import ScanConfig
from src.core.oracle import spectrum_at
from src.core.rabi import RabiParams
from src.core.spectrum import find_spectrum

# regular levels (x = E + g^2/omega) at g=0.7, Delta=0.4, omega=1
KNOWN_LEVELS = [-0.217805, 0.0629563, 0.86095, 1.1636, 1.85076]


def bessel_j(n: int, z: float, terms: int = 40) -> float:
    """J_n(z) from its power series"""
    half = 0.5 * z
    return sum(
        (-1) ** k * half ** (2 * k + n) / (math.factorial(k) * math.factorial(k + n))
        for k in range(terms)
    )


@pytest.fixture(scope="session")
def rabi_params():
    return RabiParams(g=0.7, delta=0.4, omega=1.0)


@pytest.fixture(scope="session")
def window_cfg():
    return ScanConfig(xmin=-0.5, xmax=2.0)


@pytest.fixture(scope="session")
def known_spectrum(rabi_params, window_cfg):
    return find_spectrum(rabi_params, window_cfg)


@pytest.fixture(scope="session")
def known_oracle(rabi_params):
    return spectrum_at(rabi_params, 256)
