# tools/ratio_benchmark.py
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.config import ToleranceConfig
from src.core.errors import RabiSpectrumError
from src.core.gfunction import Parity, g_pm
from src.core.rabi import RabiParams, f_n, rabi_coefficients
from src.core.recurrence import euler_series_ratio, minimal_ratio


def time_evaluations(
    label: str,
    fn: Callable[[float], float],
    xs: List[float],
    repeats: int = 3,
) -> Dict[str, float]:
    """
    Time fn over a grid and report the best per-point cost.

    Args:
        label: Name printed in the table
        fn: Function of x to time
        xs: Grid points (pole-free)
        repeats: Timing repetitions; the fastest is kept
    """
    best = float("inf")
    failures = 0
    for _ in range(repeats):
        failures = 0
        start = time.perf_counter()
        for x in xs:
            try:
                fn(x)
            except RabiSpectrumError:
                failures += 1
        best = min(best, time.perf_counter() - start)
    per_point = best / len(xs)
    print(f"{label:<28} {per_point * 1e6:10.1f} us/point   failures: {failures}")
    return {"label": label, "seconds_per_point": per_point, "failures": failures}


def run_benchmark(
    g: float = 0.7,
    delta: float = 0.4,
    omega: float = 1.0,
    xmin: float = -0.5,
    xmax: float = 4.0,
    points: int = 200,
) -> List[Dict[str, float]]:
    """
    Compare the cost of r0 by continued fraction, r0 by Euler series and G+/-.

    Args:
        g, delta, omega: Model parameters
        xmin, xmax: Grid window
        points: Number of grid points (baselines are nudged off)
    """
    params = RabiParams(g, delta, omega)
    tol = ToleranceConfig()
    xs = [float(x) for x in np.linspace(xmin, xmax, points)]
    xs = [x + 0.05 * omega if abs(x / omega - round(x / omega)) < 0.05 else x for x in xs]

    print(f'\nSpectral-function cost for g={g}, delta={delta}, omega={omega}')
    print('=' * 64)
    return [
        time_evaluations(
            "F0 via continued fraction",
            lambda x: f_n(params, 0, x) - minimal_ratio(rabi_coefficients(params, x), tol).value,
            xs,
        ),
        time_evaluations(
            "F0 via Euler series",
            lambda x: f_n(params, 0, x) - euler_series_ratio(rabi_coefficients(params, x), tol).value,
            xs,
        ),
        time_evaluations("G+ (forward series)", lambda x: g_pm(params, Parity.PLUS, x), xs),
    ]


if __name__ == '__main__':
    run_benchmark()
