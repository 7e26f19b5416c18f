"""Minimal solutions of three-term recurrences

    y_{n+1} + a_n y_n + b_n y_{n-1} = 0,    n >= 1.

The minimal solution is the one with y_{n+1}/y_n -> 0. Its ratio
r_0 = y_1/y_0 is the value of the continued fraction

    r_0 = -b_1/(a_1 - b_2/(a_2 - b_3/(a_3 - ...)))

which is evaluated here three ways: by downward truncation, by the
Euler series of convergent differences, and through the normalized
coefficient sequence (Miller's backward recursion).
"""
from dataclasses import dataclass
from typing import Callable, List, Tuple
import logging
import math

import numpy as np

from src.core.config import ToleranceConfig
from src.core.errors import (
    CoefficientDomainError,
    ConfigurationError,
    DegenerateHeadError,
    DegenerateNormalizationError,
)

logger = logging.getLogger(__name__)

# Backward recursion grows like the dominant solution; rescale before overflow.
_RESCALE_AT = 2.0 ** 660


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Lazy provider of a(n), b(n) for n >= 1"""
    a: Callable[[int], float]
    b: Callable[[int], float]
    description: str = ""

    def at(self, n: int) -> Tuple[float, float]:
        """Validated (a(n), b(n)) pair"""
        a_n = float(self.a(n))
        b_n = float(self.b(n))
        if not math.isfinite(a_n):
            raise CoefficientDomainError(f"a({n}) is not finite: {a_n!r}", index=n)
        if not math.isfinite(b_n):
            raise CoefficientDomainError(f"b({n}) is not finite: {b_n!r}", index=n)
        if b_n == 0.0:
            raise CoefficientDomainError(f"b({n}) vanishes; the recurrence degenerates", index=n)
        return a_n, b_n

    def shifted(self, k: int) -> "RecurrenceCoefficients":
        """Provider of a(n+k), b(n+k); its r_0 is r_k of this recurrence"""
        if k < 0:
            raise ValueError(f"shift must be non-negative, got {k}")
        if k == 0:
            return self
        a, b = self.a, self.b
        return RecurrenceCoefficients(
            a=lambda n: a(n + k),
            b=lambda n: b(n + k),
            description=f"{self.description} shifted by {k}".strip(),
        )


@dataclass
class MinimalRatioResult:
    value: float
    terms_used: int
    converged: bool
    est_error: float
    floor_events: int = 0
    method: str = "continued_fraction"


@dataclass
class MinimalSequence:
    c: List[float]
    normalization: str = "c0=1"
    depth: int = 0


class _CoefficientTable:
    """Grows a cached list of (a_n, b_n) so that deeper truncations reuse work"""

    def __init__(self, coeffs: RecurrenceCoefficients):
        self.coeffs = coeffs
        self.a: List[float] = [math.nan]
        self.b: List[float] = [math.nan]

    def extend_to(self, n: int) -> None:
        for k in range(len(self.a), n + 1):
            a_k, b_k = self.coeffs.at(k)
            self.a.append(a_k)
            self.b.append(b_k)


def _floored(d: float, tiny_floor: float) -> Tuple[float, bool]:
    if abs(d) < tiny_floor:
        return math.copysign(tiny_floor, d), True
    return d, False


def _backward_sweep(
    table: _CoefficientTable, n_trunc: int, tiny_floor: float, keep: int = 0
) -> Tuple[List[float], int]:
    """Downward recursion r_{k-1} = -b_k/(a_k + r_k) from r_N = 0.

    Returns the ratios r_0..r_keep and the number of floored denominators.
    """
    table.extend_to(n_trunc)
    a, b = table.a, table.b
    kept = [0.0] * (keep + 1)
    events = 0
    r = 0.0
    for k in range(n_trunc, 0, -1):
        d, floored = _floored(a[k] + r, tiny_floor)
        events += floored
        r = -b[k] / d
        if k - 1 <= keep:
            kept[k - 1] = r
    return kept, events


def cf_truncated_ratio(coeffs: RecurrenceCoefficients, n_trunc: int, tiny_floor: float = 1e-300) -> float:
    """N-term truncation r_0^(N) of the minimal-ratio continued fraction.

    >>> cf_truncated_ratio(constant_coefficients(-2.5, 1.0), 60)
    0.5
    """
    if n_trunc < 1:
        raise ValueError(f"n_trunc must be >= 1, got {n_trunc}")
    ratios, events = _backward_sweep(_CoefficientTable(coeffs), n_trunc, tiny_floor)
    if events:
        logger.debug(f"{events} floored denominators at depth {n_trunc} ({coeffs.description})")
    return ratios[0]


def minimal_ratios(
    coeffs: RecurrenceCoefficients, n_upto: int, n_trunc: int, tiny_floor: float = 1e-300
) -> List[float]:
    """Downward ratio estimates r_0..r_{n_upto} from one sweep of depth n_trunc"""
    if not 0 <= n_upto < n_trunc:
        raise ValueError(f"need 0 <= n_upto < n_trunc, got {n_upto}, {n_trunc}")
    ratios, _ = _backward_sweep(_CoefficientTable(coeffs), n_trunc, tiny_floor, keep=n_upto)
    return ratios


def minimal_ratio(coeffs: RecurrenceCoefficients, tol: ToleranceConfig = ToleranceConfig()) -> MinimalRatioResult:
    """Minimal ratio r_0 with adaptive (doubling) truncation depth.

    Converged once two consecutive depth doublings each move the value by at
    most rel_tol*(1+|r_0|); a truncated fraction can stall for one step near
    one of its own poles. Non-convergence is reported through
    ``converged=False``, not raised.
    """
    table = _CoefficientTable(coeffs)
    depth = tol.n_start
    ratios, events = _backward_sweep(table, depth, tol.tiny_floor)
    previous = ratios[0]
    value, est_error = previous, math.inf
    small_deltas = 0

    while 2 * depth <= tol.n_max:
        depth *= 2
        ratios, floored = _backward_sweep(table, depth, tol.tiny_floor)
        events += floored
        value = ratios[0]
        est_error = abs(value - previous)
        if est_error <= tol.rel_tol * (1.0 + abs(value)):
            small_deltas += 1
            if small_deltas >= 2:
                return MinimalRatioResult(value, depth, True, est_error, events)
        else:
            small_deltas = 0
        previous = value

    logger.warning(
        f"minimal ratio not converged at depth {depth} ({coeffs.description}): "
        f"delta={est_error:g}"
    )
    return MinimalRatioResult(value, depth, False, est_error, events)


def euler_series_ratio(coeffs: RecurrenceCoefficients, tol: ToleranceConfig = ToleranceConfig()) -> MinimalRatioResult:
    """Minimal ratio r_0 as the series of convergent differences.

    With sigma_1 = a(1), rho_1 = -b(1)/a(1) and for k >= 1

        sigma_{k+1} = a(k+1) - b(k+1)/sigma_k
        rho_{k+1}   = b(k+1)/(sigma_k sigma_{k+1})

    r_0 = sum_k rho_1 rho_2 ... rho_k. sigma_k is the ratio of consecutive
    convergent denominators, so the partial sums are exactly the
    continued-fraction convergents.
    """
    a_1, b_1 = coeffs.at(1)
    if a_1 == 0.0:
        raise DegenerateHeadError()

    sigma = a_1
    term = -b_1 / a_1
    terms = [term]
    running = term
    small_streak = 1 if abs(term) <= tol.rel_tol * (1.0 + abs(running)) else 0
    events = 0

    k = 1
    while small_streak < 2 and k < tol.n_max:
        a_next, b_next = coeffs.at(k + 1)
        sigma_next, floored = _floored(a_next - b_next / sigma, tol.tiny_floor)
        events += floored
        term *= b_next / (sigma * sigma_next)
        terms.append(term)
        running += term
        sigma = sigma_next
        k += 1
        if abs(term) <= tol.rel_tol * (1.0 + abs(running)):
            small_streak += 1
        else:
            small_streak = 0

    value = math.fsum(terms)
    converged = small_streak >= 2
    if not converged:
        logger.warning(f"Euler series not converged after {k} terms ({coeffs.description})")
    return MinimalRatioResult(value, k, converged, abs(term), events, method="euler_series")


def _miller_sweep(table: _CoefficientTable, depth: int, n_len: int) -> np.ndarray:
    """Trial backward recursion from y_{N+1}=0, y_N=1; returns y_0..y_{n_len-1} unnormalized"""
    table.extend_to(depth)
    a, b = table.a, table.b
    y = np.zeros(depth + 2)
    y[depth] = 1.0
    for n in range(depth, 0, -1):
        y[n - 1] = -(y[n + 1] + a[n] * y[n]) / b[n]
        if abs(y[n - 1]) > _RESCALE_AT:
            y[n - 1:] /= _RESCALE_AT
    return y[:n_len]


def minimal_sequence(
    coeffs: RecurrenceCoefficients, n_len: int, tol: ToleranceConfig = ToleranceConfig()
) -> MinimalSequence:
    """First n_len coefficients of the minimal solution normalized to c_0 = 1"""
    if n_len < 2:
        raise ValueError(f"n_len must be >= 2, got {n_len}")
    if n_len > tol.n_max:
        raise ConfigurationError(f"n_len={n_len} exceeds the depth budget n_max={tol.n_max}")

    table = _CoefficientTable(coeffs)
    depth = min(max(tol.n_start, 2 * n_len), tol.n_max)
    previous = None
    while depth <= tol.n_max:
        y = _miller_sweep(table, depth, n_len)
        if y[0] == 0.0 or not np.all(np.isfinite(y)):
            logger.debug(f"trial c0 vanished at depth {depth}; deepening")
            previous = None
            depth *= 2
            continue
        c = y / y[0]
        if previous is not None and np.allclose(
            c, previous, rtol=tol.rel_tol, atol=tol.rel_tol * np.max(np.abs(previous))
        ):
            return MinimalSequence(c=c.tolist(), depth=depth)
        previous = c
        depth *= 2

    if previous is None:
        raise DegenerateNormalizationError(
            f"c0 vanished at every depth up to {tol.n_max} ({coeffs.description})", depth // 2
        )
    logger.warning(f"minimal sequence not stable up to depth {tol.n_max}; returning last estimate")
    return MinimalSequence(c=previous.tolist(), depth=depth // 2)


@dataclass
class MinimalPair:
    """Unit vector along (y_0, y_1) of the minimal solution.

    Unlike the ratio y_1/y_0 it stays finite where y_0 vanishes.
    """
    y0: float
    y1: float
    terms_used: int
    converged: bool
    est_error: float


def minimal_pair(coeffs: RecurrenceCoefficients, tol: ToleranceConfig = ToleranceConfig()) -> MinimalPair:
    """Direction of (y_0, y_1) from the trial backward recursion, depth doubled until stable.

    Successive estimates are compared through the sine of the angle between
    them; two consecutive doublings must each stay within rel_tol.

    >>> pair = minimal_pair(constant_coefficients(-2.5, 1.0))
    >>> round(pair.y1 / pair.y0, 12)
    0.5
    """
    table = _CoefficientTable(coeffs)
    depth = tol.n_start
    previous = None
    unit = np.array([math.nan, math.nan])
    est_error = math.inf
    small_deltas = 0

    while depth <= tol.n_max:
        y = _miller_sweep(table, depth, 2)
        norm = float(np.hypot(y[0], y[1]))
        if norm == 0.0 or not math.isfinite(norm):
            raise DegenerateNormalizationError(
                f"trial (y0, y1) degenerate at depth {depth} ({coeffs.description})", depth
            )
        unit = y / norm
        if previous is not None:
            est_error = abs(unit[0] * previous[1] - unit[1] * previous[0])
            if est_error <= tol.rel_tol:
                small_deltas += 1
                if small_deltas >= 2:
                    return MinimalPair(float(unit[0]), float(unit[1]), depth, True, est_error)
            else:
                small_deltas = 0
        previous = unit
        depth *= 2

    logger.warning(
        f"minimal pair not converged at depth {depth // 2} ({coeffs.description}): "
        f"sine={est_error:g}"
    )
    return MinimalPair(float(unit[0]), float(unit[1]), depth // 2, False, est_error)


def constant_coefficients(a: float, b: float) -> RecurrenceCoefficients:
    """a(n)=a, b(n)=b; minimal ratio is the smaller characteristic root"""
    return RecurrenceCoefficients(
        a=lambda n: a, b=lambda n: b, description=f"constant(a={a}, b={b})"
    )


def bessel_coefficients(z: float) -> RecurrenceCoefficients:
    """J_{n+1}(z) - (2n/z) J_n(z) + J_{n-1}(z) = 0; minimal solution J_n(z)"""
    if z == 0.0:
        raise ValueError("z must be non-zero")
    return RecurrenceCoefficients(
        a=lambda n: -2.0 * n / z, b=lambda n: 1.0, description=f"bessel(z={z})"
    )
