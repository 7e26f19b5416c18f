"""Pole-aware sign-change scanner for spectral functions.

The window is cut at every baseline n*omega (minus a pole margin), each
remaining interval is sampled on a uniform grid, sign changes are probed
to tell zeros from poles, and zeros are refined by bisection. The scanned
function is pluggable so that F_0 and the parity functions G+/- share the
same machinery. The regular spectrum is bracketed on the regularized form
of F_0, which has no poles between baselines; residuals are still |F_0|.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

from src.core.config import ScanConfig, ToleranceConfig
from src.core.errors import (
    CoefficientDomainError,
    DegenerateNormalizationError,
    NonConvergenceError,
    RefinementError,
    SpuriousSignChangeError,
)
from src.core.rabi import (
    RabiParams,
    SpectralPoint,
    poles_in,
    regularized_spectral_function,
    spectral_function,
)

logger = logging.getLogger(__name__)

Bracket = Tuple[float, float]
ScannedFunction = Callable[[float], float]

# failures that mark a grid point as unusable rather than aborting the scan
_EVALUATION_ERRORS = (NonConvergenceError, CoefficientDomainError, DegenerateNormalizationError)


@dataclass
class SpectrumResult:
    zeros: List[SpectralPoint] = field(default_factory=list)
    skipped_intervals: List[Bracket] = field(default_factory=list)
    nonconverged: List[float] = field(default_factory=list)
    method: str = "F0"
    brackets: List[Bracket] = field(default_factory=list)
    poles: List[float] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)
    evaluations: int = 0

    @property
    def xs(self) -> List[float]:
        return [point.x for point in self.zeros]


@dataclass
class _Bracketing:
    brackets: List[Bracket] = field(default_factory=list)
    skipped: List[Bracket] = field(default_factory=list)
    nonconverged: List[float] = field(default_factory=list)
    poles: List[float] = field(default_factory=list)
    evaluations: int = 0


def _safe_eval(fn: ScannedFunction, x: float) -> Optional[float]:
    try:
        return fn(x)
    except _EVALUATION_ERRORS as e:
        logger.debug(f"evaluation failed at x={x!r}: {e}")
        return None


def _pool_map(func: Callable, items: Sequence, workers: int) -> List:
    """Order-preserving map, in a process pool when workers > 1"""
    if workers <= 1 or len(items) < 2:
        return [func(item) for item in items]
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunksize))


def evaluate_grid(fn: ScannedFunction, xs: Sequence[float], workers: int = 1) -> List[Optional[float]]:
    """fn on every grid point; None where it is undefined (pole margin) or unconverged"""
    return _pool_map(partial(_safe_eval, fn), [float(x) for x in xs], workers)


def _exclusion(pole: float, margin: float) -> float:
    # a hair wider than the margin so endpoints never round onto it
    return margin + 16.0 * math.ulp(max(1.0, abs(pole), margin))


def pole_free_segments(params: RabiParams, cfg: ScanConfig) -> Tuple[List[Bracket], List[Bracket]]:
    """Split [xmin, xmax] at the baselines; returns (segments, skipped)"""
    cfg = cfg.resolved(params.omega)
    margin = cfg.pole_margin
    reach = 2.0 * margin
    poles = poles_in(params, cfg.xmin - reach, cfg.xmax + reach, margin).poles

    segments: List[Bracket] = []
    skipped: List[Bracket] = []
    cursor = cfg.xmin
    for pole in poles:
        half = _exclusion(pole, margin)
        lo_ex, hi_ex = pole - half, pole + half
        if lo_ex > cursor:
            end = min(lo_ex, cfg.xmax)
            if end > cursor:
                segments.append((cursor, end))
        if hi_ex > cfg.xmin and lo_ex < cfg.xmax:
            skipped.append((max(lo_ex, cfg.xmin), min(hi_ex, cfg.xmax)))
        cursor = max(cursor, hi_ex)
    if cursor < cfg.xmax:
        segments.append((cursor, cfg.xmax))
    return segments, skipped


def _grid(segment: Bracket, cfg: ScanConfig, omega: float) -> np.ndarray:
    lo, hi = segment
    points = max(2, math.ceil((hi - lo) * cfg.grid_per_unit / omega) + 1)
    return np.linspace(lo, hi, points)


def _probe(fn: ScannedFunction, steps: int, candidate: Tuple[float, float, float, float]) -> Tuple[str, int]:
    """Classify a sign change as 'root' or 'pole' by a few bisection steps.

    Near a zero the end values shrink with the bracket; near a pole they grow.
    """
    lo, hi, f_lo, f_hi = candidate
    start = max(abs(f_lo), abs(f_hi))
    evaluations = 0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        f_mid = _safe_eval(fn, mid)
        evaluations += 1
        if f_mid is None:
            return "unknown", evaluations
        if f_mid == 0.0:
            return "root", evaluations
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return ("root" if max(abs(f_lo), abs(f_hi)) < start else "pole"), evaluations


def _bracket(fn: ScannedFunction, params: RabiParams, cfg: ScanConfig) -> _Bracketing:
    cfg = cfg.resolved(params.omega)
    state = _Bracketing()
    segments, state.skipped = pole_free_segments(params, cfg)

    candidates: List[Tuple[float, float, float, float]] = []
    for segment in segments:
        xs = _grid(segment, cfg, params.omega)
        values = evaluate_grid(fn, xs, cfg.workers)
        state.evaluations += len(xs)
        for x, value in zip(xs, values):
            if value is None:
                state.nonconverged.append(float(x))
        for i in range(len(xs) - 1):
            v_lo, v_hi = values[i], values[i + 1]
            if v_lo is None or v_hi is None:
                continue
            if v_lo * v_hi < 0.0:
                candidates.append((float(xs[i]), float(xs[i + 1]), v_lo, v_hi))

    verdicts = _pool_map(partial(_probe, fn, cfg.probe_bisections), candidates, cfg.workers)
    for (lo, hi, _, _), (verdict, evaluations) in zip(candidates, verdicts):
        state.evaluations += evaluations
        if verdict == "pole":
            logger.debug(f"sign change in [{lo!r}, {hi!r}] is a pole")
            state.poles.append(0.5 * (lo + hi))
        else:
            state.brackets.append((lo, hi))

    if state.nonconverged:
        logger.warning(f"{len(state.nonconverged)} grid points could not be evaluated")
    logger.debug(
        f"{len(state.brackets)} brackets, {len(state.poles)} pole crossings in "
        f"[{cfg.xmin!r}, {cfg.xmax!r}]"
    )
    return state


def _bisect(
    fn: ScannedFunction, lo: float, hi: float, params: RabiParams, cfg: ScanConfig,
    residual_fn: Optional[ScannedFunction] = None,
) -> Tuple[SpectralPoint, int]:
    """Bisect on fn; the reported residual is |residual_fn(x*)| when given, else |fn(x*)|"""
    initial = (lo, hi)
    try:
        f_lo, f_hi = fn(lo), fn(hi)
    except _EVALUATION_ERRORS as e:
        raise RefinementError(f"bracket endpoints not evaluable: {e}", initial) from e
    if not f_lo * f_hi < 0.0:
        raise RefinementError(f"no sign change in [{lo!r}, {hi!r}]", initial)
    bound = min(abs(f_lo), abs(f_hi))
    evaluations = 2

    try:
        for _ in range(cfg.max_bisections):
            if hi - lo <= cfg.root_tol:
                break
            mid = 0.5 * (lo + hi)
            f_mid = fn(mid)
            evaluations += 1
            if f_mid == 0.0:
                lo = hi = mid
                break
            if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
                lo, f_lo = mid, f_mid
            else:
                hi, f_hi = mid, f_mid
        else:
            if hi - lo > cfg.root_tol:
                raise RefinementError(
                    f"bracket width {hi - lo:g} above root_tol after {cfg.max_bisections} bisections",
                    initial,
                )
        x = 0.5 * (lo + hi)
        scanned_residual = abs(fn(x))
        evaluations += 1
        if scanned_residual > bound:
            raise SpuriousSignChangeError(initial, scanned_residual)
        residual = scanned_residual
        if residual_fn is not None:
            residual = abs(residual_fn(x))
            evaluations += 1
    except _EVALUATION_ERRORS as e:
        raise RefinementError(f"evaluation failed during refinement: {e}", initial) from e

    point = SpectralPoint(x=x, energy=params.to_energy(x), residual=residual, bracket=(lo, hi))
    return point, evaluations


def _refine_task(
    fn: ScannedFunction, params: RabiParams, cfg: ScanConfig,
    residual_fn: Optional[ScannedFunction], bracket: Bracket,
):
    """Refinement outcome as plain data so it crosses process boundaries"""
    try:
        point, evaluations = _bisect(fn, bracket[0], bracket[1], params, cfg, residual_fn)
        return "zero", point, evaluations
    except SpuriousSignChangeError as e:
        return "pole", str(e), 0
    except RefinementError as e:
        return "failed", str(e), 0


def scan(
    fn: ScannedFunction, params: RabiParams, cfg: ScanConfig, method: str = "F0",
    residual_fn: Optional[ScannedFunction] = None,
) -> SpectrumResult:
    """Bracket and refine every zero of fn in the scan window"""
    cfg = cfg.resolved(params.omega)
    state = _bracket(fn, params, cfg)
    result = SpectrumResult(
        skipped_intervals=state.skipped,
        nonconverged=state.nonconverged,
        method=method,
        brackets=list(state.brackets),
        poles=list(state.poles),
        evaluations=state.evaluations,
    )

    outcomes = _pool_map(partial(_refine_task, fn, params, cfg, residual_fn), state.brackets, cfg.workers)
    for bracket, (status, payload, evaluations) in zip(state.brackets, outcomes):
        result.evaluations += evaluations
        if status == "zero":
            result.zeros.append(payload)
        elif status == "pole":
            logger.info(payload)
            result.poles.append(0.5 * (bracket[0] + bracket[1]))
        else:
            logger.warning(f"refinement failed in [{bracket[0]!r}, {bracket[1]!r}]: {payload}")
            result.failures.append({"bracket": list(bracket), "error": payload})

    result.zeros.sort(key=lambda point: point.x)
    result.poles.sort()
    logger.info(f"{method}: {len(result.zeros)} zeros in [{cfg.xmin!r}, {cfg.xmax!r}]")
    return result


def bracket_roots(
    params: RabiParams, cfg: ScanConfig, tol: ToleranceConfig = ToleranceConfig()
) -> List[Bracket]:
    """Sign-change brackets of (regularized) F_0 that are zeros rather than poles"""
    cfg = cfg.resolved(params.omega)
    return _bracket(regularized_spectral_function(params, tol, cfg.pole_margin), params, cfg).brackets


def refine_root(
    params: RabiParams, lo: float, hi: float, cfg: ScanConfig, tol: ToleranceConfig = ToleranceConfig(),
    fn: Optional[ScannedFunction] = None,
) -> SpectralPoint:
    """Bisect a sign-change bracket of regularized F_0 (or fn) down to root_tol.

    Without fn the residual reported is |F_0(x*)|.
    """
    cfg = cfg.resolved(params.omega)
    residual_fn = None
    if fn is None:
        fn = regularized_spectral_function(params, tol, cfg.pole_margin)
        residual_fn = spectral_function(params, tol, cfg.pole_margin)
    point, _ = _bisect(fn, lo, hi, params, cfg, residual_fn)
    return point


def find_spectrum(
    params: RabiParams, cfg: ScanConfig, tol: ToleranceConfig = ToleranceConfig()
) -> SpectrumResult:
    """Regular spectrum on the scan window as the ordered zeros of F_0.

    Brackets come from the regularized form, so a level lying next to a
    pole of r_0 is not lost to a cancelling pair of sign changes.
    """
    cfg = cfg.resolved(params.omega)
    return scan(
        regularized_spectral_function(params, tol, cfg.pole_margin), params, cfg, method="F0",
        residual_fn=spectral_function(params, tol, cfg.pole_margin),
    )


def match_levels(reference: Iterable[float], found: Iterable[float]) -> List[Tuple[float, Optional[float], float]]:
    """Pair each reference value with the nearest found value.

    Returns (reference, nearest or None, |difference| or inf) triples.
    """
    found = sorted(found)
    rows = []
    for ref in reference:
        if not found:
            rows.append((ref, None, math.inf))
            continue
        nearest = min(found, key=lambda x: abs(x - ref))
        rows.append((ref, nearest, abs(nearest - ref)))
    return rows
