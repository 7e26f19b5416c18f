"""End-to-end agreement between the spectral-function zeros and the truncated Hamiltonian"""
import pytest

from src.core.config import ScanConfig
from src.core.oracle import spectrum_at
from src.core.rabi import RabiParams, nearest_pole_distance
from src.core.spectrum import find_spectrum, match_levels
from tests.conftest import KNOWN_LEVELS

pytestmark = pytest.mark.slow


@pytest.mark.parametrize(
    "g, delta, omega",
    [
        (0.7, 0.4, 1.0),
        (0.1, 0.4, 1.0),
        (1.0, 0.7, 1.0),
    ],
)
def test_lowest_levels_agree_with_oracle(g, delta, omega):
    params = RabiParams(g, delta, omega)
    oracle = spectrum_at(params, 256)
    regular = [x for x in oracle.x_values if nearest_pole_distance(params, x)[1] > 1e-6 * omega]
    lowest = regular[:8]
    cfg = ScanConfig(xmin=lowest[0] - 0.5 * omega, xmax=0.5 * (regular[7] + regular[8]))

    result = find_spectrum(params, cfg)
    assert not result.failures
    assert len(result.xs) == len(lowest)
    for i, (_, _, deviation) in enumerate(match_levels(lowest, result.xs)):
        assert deviation <= (1e-6 if i < 5 else 1e-4), i


def test_known_levels_end_to_end():
    result = find_spectrum(RabiParams(0.7, 0.4, 1.0), ScanConfig(xmin=-0.5, xmax=2.0))
    assert len(result.xs) == 5
    for x, expected in zip(result.xs, KNOWN_LEVELS):
        assert x == pytest.approx(expected, abs=1e-4)
