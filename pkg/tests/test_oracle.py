import numpy as np
import pytest

from src.core.errors import TruncationFailureError
from src.core.oracle import (
    basis_index,
    build_hamiltonian,
    converged_levels,
    eigenvalues,
    spectrum_at,
    symmetric_eigenvalues,
)
from src.core.rabi import RabiParams
from tests.conftest import KNOWN_LEVELS


def test_basis_is_interleaved():
    assert [basis_index(0, 1), basis_index(0, -1), basis_index(3, 1), basis_index(3, -1)] == [0, 1, 6, 7]


def test_single_boson_block(rabi_params):
    h = build_hamiltonian(rabi_params, 1)
    g, delta = 0.7, 0.4
    expected = np.array(
        [
            [delta, 0.0, 0.0, g],
            [0.0, -delta, g, 0.0],
            [0.0, g, 1.0 + delta, 0.0],
            [g, 0.0, 0.0, 1.0 - delta],
        ]
    )
    assert h.dim == 4
    np.testing.assert_allclose(h.entries, expected, atol=0.0)


def test_hamiltonian_is_symmetric_and_banded(rabi_params):
    h = build_hamiltonian(rabi_params, 40).entries
    assert h.shape == (82, 82)
    np.testing.assert_array_equal(h, h.T)
    rows, cols = np.nonzero(h)
    assert np.max(np.abs(rows - cols)) <= 3


def test_decoupled_spectrum():
    params = RabiParams(g=0.0, delta=0.4, omega=1.0)
    h = build_hamiltonian(params, 10)
    assert np.count_nonzero(h.entries - np.diag(np.diag(h.entries))) == 0
    energies = eigenvalues(h).energies
    expected = sorted(n + s * 0.4 for n in range(11) for s in (1, -1))
    np.testing.assert_allclose(energies, expected, atol=1e-14)


def test_two_by_two_closed_form():
    values = symmetric_eigenvalues(np.array([[1.0, 2.0], [2.0, -3.0]]))
    np.testing.assert_allclose(values, [-1.0 - np.sqrt(8.0), -1.0 + np.sqrt(8.0)], rtol=1e-14)


def test_matches_lapack_on_random_symmetric_matrix():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((30, 30))
    a = a + a.T
    norm = np.max(np.sum(np.abs(a), axis=1))
    np.testing.assert_allclose(symmetric_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-9 * norm)


def test_matches_lapack_on_rabi_hamiltonian(rabi_params):
    h = build_hamiltonian(rabi_params, 60)
    ours = eigenvalues(h, rabi_params.shift)
    np.testing.assert_allclose(ours.energies, np.linalg.eigvalsh(h.entries), atol=1e-9)
    np.testing.assert_allclose(np.array(ours.x_values) - np.array(ours.energies), 0.49, atol=1e-14)
    norm = np.max(np.sum(np.abs(h.entries), axis=1))
    assert abs(sum(ours.energies) - np.trace(h.entries)) <= 1e-9 * norm


def test_displaced_oscillator_ground_state():
    params = RabiParams(g=0.5, delta=0.0, omega=1.0)
    assert spectrum_at(params, 64).energies[0] == pytest.approx(-0.25, abs=1e-8)


def test_larger_cutoff_never_raises_a_level(rabi_params):
    small = spectrum_at(rabi_params, 64).energies
    large = spectrum_at(rabi_params, 128).energies
    for i in range(10):
        assert large[i] <= small[i] + 1e-12


def test_fixed_cutoff_reproduces_known_levels(known_oracle):
    np.testing.assert_allclose(known_oracle.x_values[:5], KNOWN_LEVELS, atol=1e-4)
    assert known_oracle.n_fock == 256


def test_converged_levels_by_doubling(rabi_params):
    result = converged_levels(rabi_params, 5, tol=1e-8)
    assert result.n_fock <= 256
    assert result.converged_count >= 5
    assert result.history[0] == 64
    assert result.history[-1] == result.n_fock


def test_decoupled_levels_converge_immediately():
    result = converged_levels(RabiParams(g=0.0, delta=0.4, omega=1.0), 4)
    assert result.n_fock == 128
    np.testing.assert_allclose(result.energies[:4], [-0.4, 0.4, 0.6, 1.4], atol=1e-14)


def test_too_many_levels_for_cap(rabi_params):
    with pytest.raises(TruncationFailureError):
        converged_levels(rabi_params, 10, n_fock_cap=16)
    with pytest.raises(TruncationFailureError):
        converged_levels(rabi_params, 100, n_fock_cap=32)


def test_cutoff_must_be_positive(rabi_params):
    with pytest.raises(ValueError):
        build_hamiltonian(rabi_params, 0)
