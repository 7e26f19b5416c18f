"""Rabi-model layer on top of the recurrence engine.

H = omega a^dag a + Delta sigma_z + g sigma_x (a + a^dag). In the shifted
energy variable x = E + g^2/omega the Bargmann-space coefficients obey

    (n+1) c_{n+1} = f_n(x) c_n - c_{n-1},
    f_n(x) = 2g + (n omega - x + Delta^2/(x - n omega)) / (2g),

i.e. a_n = -f_n(x)/(n+1), b_n = 1/(n+1). At n = 0 the relation collapses
to c_1/c_0 = f_0(x); the minimal solution of the n >= 1 recurrence meets
it only on the regular spectrum, the zeros of F_0(x) = f_0(x) - r_0(x).
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging
import math

from src.core.config import DEFAULT_POLE_MARGIN, ToleranceConfig
from src.core.errors import ConfigurationError, NonConvergenceError, PoleProximityError
from src.core.recurrence import (
    MinimalPair,
    MinimalRatioResult,
    RecurrenceCoefficients,
    minimal_pair,
    minimal_ratio,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RabiParams:
    """Coupling g, level splitting delta and mode frequency omega (energy units)"""
    g: float
    delta: float
    omega: float = 1.0

    def __post_init__(self):
        for name in ("g", "delta", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.g < 0.0:
            raise ConfigurationError(f"g must be >= 0, got {self.g!r}")
        if self.delta < 0.0:
            raise ConfigurationError(f"delta must be >= 0, got {self.delta!r}")
        if not self.omega > 0.0:
            raise ConfigurationError(f"omega must be positive, got {self.omega!r}")

    def require_coupling(self) -> None:
        # only the oracle is defined at g = 0
        if self.g == 0.0:
            raise ConfigurationError("g = 0 makes 1/(2g) singular; use the oracle for the decoupled limit")

    @property
    def shift(self) -> float:
        return self.g ** 2 / self.omega

    @property
    def default_pole_margin(self) -> float:
        return DEFAULT_POLE_MARGIN * self.omega

    def to_energy(self, x: float) -> float:
        return x - self.shift

    def to_x(self, energy: float) -> float:
        return energy + self.shift


@dataclass
class SpectralPoint:
    x: float
    energy: float
    residual: float
    bracket: Tuple[float, float]


@dataclass
class PoleSet:
    poles: List[float]
    margin: float


def nearest_pole_distance(params: RabiParams, x: float) -> Tuple[int, float]:
    """Index and distance of the baseline n*omega closest to x (n >= 0)"""
    n = max(0, round(x / params.omega))
    return n, abs(x - n * params.omega)


def f_n(params: RabiParams, n: int, x: float, pole_margin: Optional[float] = None) -> float:
    """f_n(x) = 2g + (n omega - x + Delta^2/(x - n omega))/(2g)

    >>> round(f_n(RabiParams(0.7, 0.4, 1.0), 0, 0.5), 9)
    1.271428571
    """
    params.require_coupling()
    margin = params.default_pole_margin if pole_margin is None else pole_margin
    offset = x - n * params.omega
    if abs(offset) <= margin:
        raise PoleProximityError(n, x, margin)
    level = params.delta ** 2 / offset if params.delta != 0.0 else 0.0
    return 2.0 * params.g + (n * params.omega - x + level) / (2.0 * params.g)


def rabi_coefficients(params: RabiParams, x: float, pole_margin: Optional[float] = None) -> RecurrenceCoefficients:
    """a(n) = -f_n(x)/(n+1), b(n) = 1/(n+1); poles surface lazily per index"""
    params.require_coupling()
    return RecurrenceCoefficients(
        a=lambda n: -f_n(params, n, x, pole_margin) / (n + 1),
        b=lambda n: 1.0 / (n + 1),
        description=f"rabi(g={params.g}, delta={params.delta}, omega={params.omega}, x={x!r})",
    )


def f0_function(
    params: RabiParams,
    x: float,
    tol: ToleranceConfig = ToleranceConfig(),
    pole_margin: Optional[float] = None,
) -> Tuple[float, MinimalRatioResult]:
    """F_0(x) = f_0(x) - r_0(x) together with the ratio diagnostics.

    Raises PoleProximityError near a baseline and NonConvergenceError when
    r_0 did not converge; the spectral condition is never evaluated from an
    unconverged ratio.
    """
    f0 = f_n(params, 0, x, pole_margin)
    ratio = minimal_ratio(rabi_coefficients(params, x, pole_margin), tol)
    if not ratio.converged:
        raise NonConvergenceError(
            f"r0 did not converge at x={x!r} (depth {ratio.terms_used}, delta {ratio.est_error:g})",
            diagnostics=ratio,
        )
    value = f0 - ratio.value
    if not math.isfinite(value):
        raise NonConvergenceError(f"F0 is not finite at x={x!r}", diagnostics=ratio)
    if ratio.floor_events:
        logger.debug(f"F0({x!r}): {ratio.floor_events} floored denominators")
    return value, ratio


@dataclass(frozen=True)
class SpectralFunction:
    """Picklable x -> F_0(x), the function the spectrum scanner samples"""
    params: RabiParams
    tol: ToleranceConfig = ToleranceConfig()
    pole_margin: Optional[float] = None

    def __call__(self, x: float) -> float:
        value, _ = f0_function(self.params, x, self.tol, self.pole_margin)
        return value


def spectral_function(
    params: RabiParams, tol: ToleranceConfig = ToleranceConfig(), pole_margin: Optional[float] = None
) -> SpectralFunction:
    params.require_coupling()
    return SpectralFunction(params, tol, pole_margin)


def regularized_f0(
    params: RabiParams,
    x: float,
    tol: ToleranceConfig = ToleranceConfig(),
    pole_margin: Optional[float] = None,
) -> Tuple[float, MinimalPair]:
    """(y_1 - f_0(x) y_0)/hypot(y_0, y_1) for the minimal pair (y_0, y_1).

    Equal to -y_0 F_0(x)/hypot(y_0, y_1): the same zeros as F_0, but no
    poles where r_0 = y_1/y_0 blows up, so a level next to such a pole
    still shows up as a sign change. Baseline poles of f_0 remain.
    """
    f0 = f_n(params, 0, x, pole_margin)
    pair = minimal_pair(rabi_coefficients(params, x, pole_margin), tol)
    if not pair.converged:
        raise NonConvergenceError(
            f"minimal pair did not converge at x={x!r} (depth {pair.terms_used}, sine {pair.est_error:g})",
            diagnostics=pair,
        )
    value = pair.y1 - f0 * pair.y0
    if not math.isfinite(value):
        raise NonConvergenceError(f"regularized F0 is not finite at x={x!r}", diagnostics=pair)
    return value, pair


@dataclass(frozen=True)
class RegularizedSpectralFunction:
    """Picklable x -> regularized F_0(x); what the spectrum scanner brackets on"""
    params: RabiParams
    tol: ToleranceConfig = ToleranceConfig()
    pole_margin: Optional[float] = None

    def __call__(self, x: float) -> float:
        value, _ = regularized_f0(self.params, x, self.tol, self.pole_margin)
        return value


def regularized_spectral_function(
    params: RabiParams, tol: ToleranceConfig = ToleranceConfig(), pole_margin: Optional[float] = None
) -> RegularizedSpectralFunction:
    params.require_coupling()
    return RegularizedSpectralFunction(params, tol, pole_margin)


def poles_in(params: RabiParams, xmin: float, xmax: float, margin: Optional[float] = None) -> PoleSet:
    """Baselines n*omega (n >= 0) inside [xmin, xmax]"""
    if not xmin < xmax:
        raise ConfigurationError(f"xmin must be smaller than xmax, got [{xmin!r}, {xmax!r}]")
    first = max(0, math.ceil(xmin / params.omega))
    last = math.floor(xmax / params.omega)
    poles = [n * params.omega for n in range(first, last + 1)]
    return PoleSet(
        poles=poles,
        margin=params.default_pole_margin if margin is None else margin,
    )
