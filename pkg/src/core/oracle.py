"""Brute-force reference spectrum: the Rabi Hamiltonian in a truncated Fock basis.

Basis |n, s> (n = 0..N, s = +1, -1) interleaved as index 2n + (0 if s = +1 else 1).
Diagonal n*omega + s*Delta, coupling <n+1, -s|H|n, s> = g sqrt(n+1).
"""
from dataclasses import dataclass, field
from typing import List
import logging
import math

import numpy as np

from src.core.errors import NumericalFailureError, TruncationFailureError
from src.core.rabi import RabiParams

logger = logging.getLogger(__name__)

QL_ITERATION_BUDGET = 30
OFFDIAGONAL_THRESHOLD = 1e-12
N_FOCK_START = 64
N_FOCK_CAP = 4096


@dataclass
class TruncatedHamiltonian:
    n_fock: int
    dim: int
    entries: np.ndarray


@dataclass
class OracleSpectrum:
    energies: List[float]
    x_values: List[float]
    n_fock: int
    converged_count: int = 0
    history: List[int] = field(default_factory=list)


def basis_index(n: int, s: int) -> int:
    return 2 * n + (0 if s > 0 else 1)


def build_hamiltonian(params: RabiParams, n_fock: int) -> TruncatedHamiltonian:
    """Dense H = omega a^dag a + Delta sigma_z + g sigma_x (a + a^dag), cut at n_fock bosons"""
    if n_fock < 1:
        raise ValueError(f"n_fock must be >= 1, got {n_fock}")
    dim = 2 * (n_fock + 1)
    h = np.zeros((dim, dim))
    for n in range(n_fock + 1):
        for s in (1, -1):
            i = basis_index(n, s)
            h[i, i] = n * params.omega + s * params.delta
            if n < n_fock:
                j = basis_index(n + 1, -s)
                h[i, j] = h[j, i] = params.g * math.sqrt(n + 1)
    return TruncatedHamiltonian(n_fock=n_fock, dim=dim, entries=h)


def tridiagonalize(a: np.ndarray):
    """Householder reduction of a symmetric matrix; returns (diagonal, offdiagonal)"""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0.0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        v_norm = np.linalg.norm(v)
        if v_norm == 0.0:
            continue
        v /= v_norm
        # A <- P A P with P = I - 2 v v^T acting on the trailing block
        block = a[k + 1:, k + 1:]
        p = block @ v
        w = 2.0 * (p - (v @ p) * v)
        block -= np.outer(v, w) + np.outer(w, v)
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        a[k + 1, k] = a[k, k + 1] = alpha
    diagonal = np.diag(a).copy()
    offdiagonal = np.diag(a, -1).copy() if n > 1 else np.zeros(0)
    return diagonal, offdiagonal


def tridiagonal_eigenvalues(diagonal: np.ndarray, offdiagonal: np.ndarray, threshold: float) -> np.ndarray:
    """Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix"""
    d = [float(v) for v in diagonal]
    n = len(d)
    e = [float(v) for v in offdiagonal] + [0.0]

    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= threshold or abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > QL_ITERATION_BUDGET:
                raise NumericalFailureError(
                    f"QL iteration for eigenvalue {l} did not converge", sweeps=iterations
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.sort(np.array(d))


def symmetric_eigenvalues(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense symmetric matrix, ascending"""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    if n == 1:
        return np.array([a[0, 0]])
    if n == 2:
        mean = 0.5 * (a[0, 0] + a[1, 1])
        radius = math.hypot(0.5 * (a[0, 0] - a[1, 1]), a[0, 1])
        return np.array([mean - radius, mean + radius])
    scale = float(np.max(np.sum(np.abs(a), axis=1)))
    diagonal, offdiagonal = tridiagonalize(a)
    return tridiagonal_eigenvalues(diagonal, offdiagonal, OFFDIAGONAL_THRESHOLD * scale)


def eigenvalues(h: TruncatedHamiltonian, shift: float = 0.0) -> OracleSpectrum:
    """Sorted spectrum of a truncated Hamiltonian; x = E + shift (shift = g^2/omega)"""
    if not np.all(np.isfinite(h.entries)):
        raise ValueError("Hamiltonian has non-finite entries")
    energies = symmetric_eigenvalues(h.entries)
    return OracleSpectrum(
        energies=energies.tolist(),
        x_values=(energies + shift).tolist(),
        n_fock=h.n_fock,
    )


def spectrum_at(params: RabiParams, n_fock: int) -> OracleSpectrum:
    return eigenvalues(build_hamiltonian(params, n_fock), params.shift)


def converged_levels(
    params: RabiParams, k: int, tol: float = 1e-8, n_fock_cap: int = N_FOCK_CAP
) -> OracleSpectrum:
    """Double the cutoff from 64 until the lowest k levels move by at most tol"""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > 2 * (n_fock_cap + 1):
        raise TruncationFailureError(
            f"{k} levels exceed the dimension {2 * (n_fock_cap + 1)} at the cutoff cap", n_fock_cap
        )

    n_fock = N_FOCK_START
    while 2 * (n_fock + 1) < k:
        n_fock *= 2
    previous = spectrum_at(params, n_fock)
    history = [n_fock]
    while 2 * n_fock <= n_fock_cap:
        n_fock *= 2
        current = spectrum_at(params, n_fock)
        history.append(n_fock)
        moves = np.abs(np.array(current.energies[:k]) - np.array(previous.energies[:k]))
        logger.debug(f"n_fock={n_fock}: max level move {moves.max():g}")
        if moves.max() <= tol:
            stable = np.abs(
                np.array(current.energies[: len(previous.energies)]) - np.array(previous.energies)
            ) <= tol
            current.converged_count = int(np.argmin(stable)) if not stable.all() else len(stable)
            current.history = history
            logger.info(f"oracle: lowest {k} levels stable at n_fock={n_fock}")
            return current
        previous = current

    raise TruncationFailureError(
        f"lowest {k} levels not stable to {tol:g} below n_fock cap {n_fock_cap}", n_fock
    )
