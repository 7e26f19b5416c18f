"""Parity-resolved spectral functions G+(x), G-(x).

    K_0 = 1, K_1 = f_0(x), (n+1) K_{n+1} = f_n(x) K_n - K_{n-1}
    G+/-(x) = sum_n K_n(x) [1 -/+ Delta/(x - n omega)] g^n

The sum is carried as L_n = K_n g^n so neither factor overflows on its own:
L_{n+1} = (g f_n L_n - g^2 L_{n-1})/(n+1). The terms decay like (omega/2)^n.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional
import logging
import math

from src.core.config import ScanConfig
from src.core.errors import NonConvergenceError, PoleProximityError
from src.core.rabi import RabiParams, f_n
from src.core.spectrum import SpectrumResult, scan

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 64
_SMALL_TERM = 1e-14
_SMALL_STREAK = 3


class Parity(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> float:
        return -1.0 if self is Parity.PLUS else 1.0


@dataclass
class GFunctionSeries:
    parity: Parity
    truncation: int
    value: float


def g_series(
    params: RabiParams,
    parity: Parity,
    x: float,
    n_trunc: int = DEFAULT_TRUNCATION,
    pole_margin: Optional[float] = None,
) -> GFunctionSeries:
    """Partial sum of G+/- up to n_trunc, stopping early once the tail is negligible"""
    if n_trunc < 2:
        raise ValueError(f"n_trunc must be >= 2, got {n_trunc}")
    parity = Parity(parity)
    params.require_coupling()
    g, omega, delta = params.g, params.omega, params.delta
    margin = params.default_pole_margin if pole_margin is None else pole_margin

    def weight(n: int) -> float:
        offset = x - n * omega
        if abs(offset) <= margin:
            raise PoleProximityError(n, x, margin)
        return 1.0 + parity.sign * delta / offset

    previous_l, current_l = 1.0, g * f_n(params, 0, x, pole_margin)
    total = weight(0) + current_l * weight(1)
    last_term = current_l * weight(1)
    previous_term = weight(0)
    streak = 0

    n = 1
    while n < n_trunc:
        next_l = (g * f_n(params, n, x, pole_margin) * current_l - g * g * previous_l) / (n + 1)
        previous_l, current_l = current_l, next_l
        n += 1
        previous_term, last_term = last_term, current_l * weight(n)
        total += last_term
        if abs(last_term) < _SMALL_TERM * (1.0 + abs(total)):
            streak += 1
            if streak >= _SMALL_STREAK:
                break
        else:
            streak = 0

    if not math.isfinite(total):
        raise NonConvergenceError(f"G{parity.value} is not finite at x={x!r}")
    if streak < _SMALL_STREAK and abs(last_term) > abs(previous_term):
        raise NonConvergenceError(
            f"G{parity.value} terms still growing at n={n} (x={x!r})",
            diagnostics=GFunctionSeries(parity, n, total),
        )
    return GFunctionSeries(parity=parity, truncation=n, value=total)


def g_pm(
    params: RabiParams,
    parity: Parity,
    x: float,
    n_trunc: int = DEFAULT_TRUNCATION,
    pole_margin: Optional[float] = None,
) -> float:
    return g_series(params, parity, x, n_trunc, pole_margin).value


@dataclass(frozen=True)
class ParityFunction:
    """Picklable x -> G+/-(x) for the scanner"""
    params: RabiParams
    parity: Parity
    n_trunc: int = DEFAULT_TRUNCATION
    pole_margin: Optional[float] = None

    def __call__(self, x: float) -> float:
        return g_pm(self.params, self.parity, x, self.n_trunc, self.pole_margin)


def g_spectrum(
    params: RabiParams, cfg: ScanConfig, parity: Parity, n_trunc: int = DEFAULT_TRUNCATION
) -> SpectrumResult:
    """Zeros of G+ or G- on the scan window, method tag 'Gpm'"""
    params.require_coupling()
    cfg = cfg.resolved(params.omega)
    fn = ParityFunction(params, Parity(parity), n_trunc, cfg.pole_margin)
    return scan(fn, params, cfg, method="Gpm")


def union_spectrum(params: RabiParams, cfg: ScanConfig, n_trunc: int = DEFAULT_TRUNCATION):
    """Zeros of G+ and G- merged in x order, each tagged with its parity"""
    tagged = []
    for parity in Parity:
        for point in g_spectrum(params, cfg, parity, n_trunc).zeros:
            tagged.append((point, parity))
    tagged.sort(key=lambda item: item[0].x)
    return tagged
