import numpy as np
import pytest

from src.core.config import ScanConfig, ToleranceConfig
from src.core.errors import ConfigurationError, RefinementError, SpuriousSignChangeError
from src.core.oracle import spectrum_at
from src.core.rabi import RabiParams, nearest_pole_distance, spectral_function
from src.core.spectrum import (
    bracket_roots,
    evaluate_grid,
    find_spectrum,
    match_levels,
    pole_free_segments,
    refine_root,
    scan,
)
from tests.conftest import KNOWN_LEVELS


def test_brackets_isolate_each_level(rabi_params, window_cfg):
    brackets = bracket_roots(rabi_params, window_cfg)
    assert len(brackets) == 5
    for (lo, hi), level in zip(brackets, KNOWN_LEVELS):
        assert lo < hi
        assert lo - 1e-4 <= level <= hi + 1e-4


def test_spectrum_reproduces_known_levels(rabi_params, known_spectrum):
    assert len(known_spectrum.zeros) == 5
    assert known_spectrum.method == "F0"
    assert not known_spectrum.failures
    np.testing.assert_allclose(known_spectrum.xs, KNOWN_LEVELS, atol=1e-4)
    assert known_spectrum.xs == sorted(known_spectrum.xs)
    for point in known_spectrum.zeros:
        assert point.energy == pytest.approx(point.x - 0.49, abs=1e-14)
        assert point.bracket[1] - point.bracket[0] <= 1e-10


def test_spectrum_never_returns_a_baseline(rabi_params, known_spectrum):
    for x in known_spectrum.xs:
        assert nearest_pole_distance(rabi_params, x)[1] > 1e-6
    assert len(known_spectrum.skipped_intervals) == 3


def test_refined_residual_is_bounded_by_bracket_ends(rabi_params, known_spectrum):
    fn = spectral_function(rabi_params)
    for point in known_spectrum.zeros:
        lo, hi = next(b for b in known_spectrum.brackets if b[0] <= point.x <= b[1])
        assert point.residual <= min(abs(fn(lo)), abs(fn(hi)))


@pytest.mark.parametrize("level", [-0.217805, 0.0629563])
def test_refine_root_in_bracket(rabi_params, window_cfg, level):
    lo, hi = next(b for b in bracket_roots(rabi_params, window_cfg) if b[0] - 1e-4 <= level <= b[1] + 1e-4)
    point = refine_root(rabi_params, lo, hi, window_cfg)
    assert point.x == pytest.approx(level, abs=1e-4)


def test_refine_root_on_linear_function(rabi_params):
    cfg = ScanConfig(xmin=0.1, xmax=0.9)
    point = refine_root(rabi_params, 0.1, 0.55, cfg, fn=lambda x: 3.0 * (x - 0.3))
    assert abs(point.x - 0.3) <= cfg.root_tol
    assert point.residual <= 3.0 * cfg.root_tol


def test_refine_root_needs_sign_change(rabi_params):
    cfg = ScanConfig(xmin=0.1, xmax=0.9)
    with pytest.raises(RefinementError):
        refine_root(rabi_params, 0.1, 0.2, cfg, fn=lambda x: x - 0.3)


def test_refine_root_rejects_a_pole(rabi_params):
    cfg = ScanConfig(xmin=0.1, xmax=0.9)
    with pytest.raises(SpuriousSignChangeError):
        refine_root(rabi_params, 0.1, 0.55, cfg, fn=lambda x: 1.0 / (x - 0.31))


def test_scan_separates_zeros_from_poles(rabi_params):
    cfg = ScanConfig(xmin=0.1, xmax=0.9)
    result = scan(lambda x: (x - 0.2531) / (x - 0.6137), rabi_params, cfg, method="test")
    assert result.method == "test"
    assert result.xs == pytest.approx([0.2531], abs=1e-10)
    assert result.poles == pytest.approx([0.6137], abs=1e-2)


def test_empty_window(rabi_params):
    cfg = ScanConfig(xmin=1.2, xmax=1.2 + 1e-9)
    assert bracket_roots(rabi_params, cfg) == []
    assert find_spectrum(rabi_params, cfg).zeros == []


def test_window_inside_pole_margin_is_skipped(rabi_params):
    cfg = ScanConfig(xmin=1.0 - 1e-7, xmax=1.0 + 1e-7)
    result = find_spectrum(rabi_params, cfg)
    assert result.zeros == []
    assert result.evaluations == 0
    assert len(result.skipped_intervals) == 1


def test_pole_free_segments(rabi_params, window_cfg):
    segments, skipped = pole_free_segments(rabi_params, window_cfg)
    assert len(segments) == 3
    assert len(skipped) == 3
    for lo, hi in segments:
        assert nearest_pole_distance(rabi_params, lo)[1] > 1e-6 or lo == window_cfg.xmin
        assert nearest_pole_distance(rabi_params, hi)[1] > 1e-6


def test_evaluate_grid_marks_poles(rabi_params):
    values = evaluate_grid(spectral_function(rabi_params), [0.5, 1.0])
    assert values[0] is not None
    assert values[1] is None


def test_invalid_window():
    with pytest.raises(ConfigurationError):
        ScanConfig(xmin=2.0, xmax=1.0)


def test_finer_grid_does_not_move_levels(rabi_params, known_spectrum):
    finer = find_spectrum(rabi_params, ScanConfig(xmin=-0.5, xmax=2.0, grid_per_unit=400))
    assert len(finer.xs) == len(known_spectrum.xs)
    for a, b in zip(finer.xs, known_spectrum.xs):
        assert abs(a - b) <= 1e-10


def test_deeper_truncation_does_not_move_levels(rabi_params, window_cfg, known_spectrum):
    deeper = find_spectrum(rabi_params, window_cfg, ToleranceConfig(n_start=512))
    np.testing.assert_allclose(deeper.xs, known_spectrum.xs, atol=1e-9, rtol=0)


def test_worker_pool_gives_identical_levels(rabi_params):
    cfg = ScanConfig(xmin=-0.5, xmax=0.5)
    sequential = find_spectrum(rabi_params, cfg)
    pooled = find_spectrum(rabi_params, ScanConfig(xmin=-0.5, xmax=0.5, workers=2))
    assert pooled.xs == sequential.xs


def test_weak_coupling_levels_sit_near_bare_splitting():
    params = RabiParams(g=0.01, delta=0.4, omega=1.0)
    result = find_spectrum(params, ScanConfig(xmin=-0.6, xmax=0.8))
    assert any(abs(x + 0.4) <= 1e-3 for x in result.xs)
    assert any(abs(x - 0.4) <= 1e-3 for x in result.xs)


def test_weak_coupling_keeps_levels_next_to_ratio_poles():
    params = RabiParams(g=0.1, delta=0.4, omega=1.0)
    cfg = ScanConfig(xmin=-1.0, xmax=3.5)
    expected = [
        x for x in spectrum_at(params, 256).x_values
        if cfg.xmin <= x <= cfg.xmax and nearest_pole_distance(params, x)[1] > 1e-6
    ]
    result = find_spectrum(params, cfg)
    assert not result.failures
    assert len(result.xs) == len(expected)
    for _, _, deviation in match_levels(expected, result.xs):
        assert deviation <= 1e-6


def test_residual_is_reported_on_f0(rabi_params, known_spectrum):
    fn = spectral_function(rabi_params)
    for point in known_spectrum.zeros:
        assert point.residual == pytest.approx(abs(fn(point.x)), rel=1e-12, abs=1e-300)

def test_level_count_matches_oracle(rabi_params, window_cfg, known_spectrum, known_oracle):
    inside = [
        x for x in known_oracle.x_values
        if window_cfg.xmin <= x <= window_cfg.xmax and nearest_pole_distance(rabi_params, x)[1] > 1e-6
    ]
    assert len(inside) == len(known_spectrum.xs)


def test_match_levels():
    rows = match_levels([0.0, 1.0], [0.9, 0.05])
    assert rows[0] == (0.0, 0.05, pytest.approx(0.05))
    assert rows[1][1] == 0.9
    assert match_levels([0.3], []) == [(0.3, None, float("inf"))]
