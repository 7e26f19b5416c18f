# src/core/__init__.py
from .config import RunManifest, ScanConfig, ToleranceConfig
from .rabi import (
    PoleSet,
    RabiParams,
    SpectralPoint,
    f0_function,
    f_n,
    poles_in,
    rabi_coefficients,
    regularized_f0,
)
from .recurrence import (
    MinimalPair,
    MinimalRatioResult,
    MinimalSequence,
    RecurrenceCoefficients,
    cf_truncated_ratio,
    euler_series_ratio,
    minimal_pair,
    minimal_ratio,
    minimal_sequence,
)
from .spectrum import SpectrumResult, bracket_roots, find_spectrum, refine_root
from .oracle import OracleSpectrum, TruncatedHamiltonian, build_hamiltonian, converged_levels, eigenvalues

# G+/- cross-check is optional; installs may leave gfunction.py out
try:
    from .gfunction import Parity, g_pm, g_spectrum
    GFUNCTION_AVAILABLE = True
except ImportError:
    GFUNCTION_AVAILABLE = False

__all__ = [
    'RunManifest',
    'ScanConfig',
    'ToleranceConfig',
    'RabiParams',
    'SpectralPoint',
    'PoleSet',
    'f_n',
    'rabi_coefficients',
    'f0_function',
    'regularized_f0',
    'poles_in',
    'RecurrenceCoefficients',
    'MinimalRatioResult',
    'MinimalSequence',
    'MinimalPair',
    'cf_truncated_ratio',
    'minimal_ratio',
    'euler_series_ratio',
    'minimal_sequence',
    'minimal_pair',
    'SpectrumResult',
    'bracket_roots',
    'refine_root',
    'find_spectrum',
    'TruncatedHamiltonian',
    'OracleSpectrum',
    'build_hamiltonian',
    'eigenvalues',
    'converged_levels',
    'GFUNCTION_AVAILABLE',
]
if GFUNCTION_AVAILABLE:
    __all__ += ['Parity', 'g_pm', 'g_spectrum']
