# src/ui/cli.py
"""Command-line front end: spectrum, evaluate, oracle, compare.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure or
tolerance miss. All data goes to --output (stdout by default); logs go
to stderr.
"""
from typing import Dict, List, Optional, Sequence
import argparse
import logging
import math
import sys

import numpy as np
import pandas as pd

from src.core import GFUNCTION_AVAILABLE
from src.core.config import RunManifest, ScanConfig, ToleranceConfig
from src.core.errors import ConfigurationError, RabiSpectrumError
from src.core.oracle import converged_levels, spectrum_at
from src.core.rabi import RabiParams, nearest_pole_distance, spectral_function
from src.core.spectrum import SpectrumResult, evaluate_grid, find_spectrum, match_levels
from src.ui.output import write_output
from src.utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

DEFAULT_TOL = {"oracle": 1e-8, "compare": 1e-5}


class UsageErrorParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; this front end reserves 2 for numerics"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    physics = common.add_argument_group("model")
    physics.add_argument("--g", type=float, default=0.7, help="coupling g")
    physics.add_argument("--delta", type=float, default=0.4, help="level splitting Delta")
    physics.add_argument("--omega", type=float, default=1.0, help="mode frequency omega")

    window = common.add_argument_group("scan")
    window.add_argument("--xmin", type=float, default=-0.5)
    window.add_argument("--xmax", type=float, default=2.0)
    window.add_argument("--grid-per-unit", type=int, default=200, help="samples per omega")
    window.add_argument("--root-tol", type=float, default=1e-10)
    window.add_argument("--pole-margin", type=float, default=None, help="default 1e-6*omega")
    window.add_argument("--workers", type=int, default=1, help="worker processes for grid and refinement")

    numerics = common.add_argument_group("numerics")
    numerics.add_argument("--rel-tol", type=float, default=1e-12, help="minimal-ratio convergence")
    numerics.add_argument("--n-start", type=int, default=128, help="initial continued-fraction depth")
    numerics.add_argument(
        "--tol", type=float, default=None,
        help="oracle convergence (oracle, default 1e-8) or acceptance tolerance (compare, default 1e-5)",
    )

    io = common.add_argument_group("output")
    io.add_argument("--format", choices=RunManifest.FORMATS, default="json")
    io.add_argument("--output", default="-", help="output file, '-' for stdout")
    io.add_argument("--verbose", action="store_true")

    parser = UsageErrorParser(
        prog="rabi-spectrum",
        description="Regular spectrum of the quantum Rabi model from the zeros of F0(x) = f0(x) - r0(x)",
    )
    commands = parser.add_subparsers(dest="command", metavar="command")

    spectrum = commands.add_parser("spectrum", parents=[common], help="zeros of F0 (or G+/-) on a window")
    spectrum.add_argument("--method", choices=("f0", "gpm"), default="f0")
    spectrum.add_argument("--parity", choices=("plus", "minus"), default="plus", help="with --method gpm")

    evaluate = commands.add_parser("evaluate", parents=[common], help="F0 on a uniform grid (plot data)")
    evaluate.add_argument("--grid-points", type=int, default=501)

    oracle = commands.add_parser("oracle", parents=[common], help="truncated-Hamiltonian levels")
    oracle.add_argument("--n-fock", type=int, default=None, help="fixed cutoff; default: converge by doubling")
    oracle.add_argument("--levels", type=int, default=10)

    compare = commands.add_parser("compare", parents=[common], help="F0 zeros against the oracle (and G+/-)")
    compare.add_argument("--n-fock", type=int, default=256)
    compare.add_argument("--with-gfunction", action="store_true")
    return parser


def manifest_from_args(args: argparse.Namespace) -> RunManifest:
    """Validate every flag and resolve defaults before any computation"""
    params = RabiParams(g=args.g, delta=args.delta, omega=args.omega)
    cfg = ScanConfig(
        xmin=args.xmin,
        xmax=args.xmax,
        grid_per_unit=args.grid_per_unit,
        root_tol=args.root_tol,
        pole_margin=args.pole_margin,
        workers=args.workers,
    ).resolved(params.omega)
    tolerances = ToleranceConfig(rel_tol=args.rel_tol, n_start=args.n_start)

    options: Dict[str, object] = {}
    if args.command in DEFAULT_TOL:
        options["tol"] = DEFAULT_TOL[args.command] if args.tol is None else args.tol
        if not options["tol"] > 0.0:
            raise ConfigurationError(f"--tol must be positive, got {options['tol']!r}")
    if args.command == "spectrum":
        options["method"] = args.method
        if args.method == "gpm":
            if not GFUNCTION_AVAILABLE:
                raise ConfigurationError("--method gpm needs the G+/- module, which is not installed")
            options["parity"] = args.parity
    elif args.command == "evaluate":
        if args.grid_points < 2:
            raise ConfigurationError(f"--grid-points must be >= 2, got {args.grid_points}")
        options["grid_points"] = args.grid_points
    elif args.command in ("oracle", "compare"):
        if args.n_fock is not None and args.n_fock < 1:
            raise ConfigurationError(f"--n-fock must be >= 1, got {args.n_fock}")
        options["n_fock"] = args.n_fock
        if args.command == "oracle":
            if args.levels < 1:
                raise ConfigurationError(f"--levels must be >= 1, got {args.levels}")
            options["levels"] = args.levels
        else:
            if args.with_gfunction and not GFUNCTION_AVAILABLE:
                raise ConfigurationError("--with-gfunction needs the G+/- module, which is not installed")
            options["with_gfunction"] = args.with_gfunction

    if args.command != "oracle":
        params.require_coupling()

    return RunManifest(
        subcommand=args.command,
        params=params,
        cfg=cfg,
        tolerances=tolerances,
        output_path=args.output,
        format=args.format,
        options=options,
    )


def _spectrum_diagnostics(result: SpectrumResult) -> Dict[str, object]:
    return {
        "skipped_intervals": result.skipped_intervals,
        "nonconverged": result.nonconverged,
        "brackets": result.brackets,
        "poles": result.poles,
        "failures": result.failures,
        "evaluations": result.evaluations,
    }


def cmd_spectrum(manifest: RunManifest) -> int:
    if manifest.options.get("method") == "gpm":
        from src.core.gfunction import g_spectrum
        result = g_spectrum(manifest.params, manifest.cfg, manifest.options["parity"])
    else:
        result = find_spectrum(manifest.params, manifest.cfg, manifest.tolerances)

    frame = pd.DataFrame(
        {
            "x": [point.x for point in result.zeros],
            "energy": [point.energy for point in result.zeros],
            "residual": [point.residual for point in result.zeros],
            "bracket_lo": [point.bracket[0] for point in result.zeros],
            "bracket_hi": [point.bracket[1] for point in result.zeros],
        }
    )
    payload = {"method": result.method, "zeros": result.zeros}
    write_output(manifest, payload, frame, _spectrum_diagnostics(result))
    if result.failures:
        logger.error(f"{len(result.failures)} brackets failed to refine; partial results written")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_evaluate(manifest: RunManifest, grid_points: int) -> int:
    cfg = manifest.cfg
    xs = np.linspace(cfg.xmin, cfg.xmax, grid_points)
    fn = spectral_function(manifest.params, manifest.tolerances, cfg.pole_margin)
    values = evaluate_grid(fn, xs, cfg.workers)

    frame = pd.DataFrame({"x": xs, "F0": [math.nan if v is None else v for v in values]})
    rows = [{"x": float(x), "F0": v} for x, v in zip(xs, values)]
    gaps = sum(v is None for v in values)
    write_output(manifest, rows, frame, {"gaps": gaps})
    return EXIT_OK


def cmd_oracle(manifest: RunManifest, n_fock: Optional[int], levels: int) -> int:
    params = manifest.params
    try:
        if n_fock is not None:
            spectrum = spectrum_at(params, n_fock)
        else:
            spectrum = converged_levels(params, levels, manifest.options["tol"])
    except RabiSpectrumError as e:
        logger.error(f"oracle failed: {e}")
        return EXIT_NUMERICAL

    energies = spectrum.energies[:levels]
    x_values = spectrum.x_values[:levels]
    frame = pd.DataFrame({"E": energies, "x": x_values})
    payload = {
        "n_fock": spectrum.n_fock,
        "converged_count": spectrum.converged_count,
        "levels": [{"index": i, "E": e, "x": x} for i, (e, x) in enumerate(zip(energies, x_values))],
    }
    write_output(manifest, payload, frame, {"n_fock_history": spectrum.history})
    return EXIT_OK


def cmd_compare(manifest: RunManifest) -> int:
    params, cfg, options = manifest.params, manifest.cfg, manifest.options
    tol = options["tol"]

    f0 = find_spectrum(params, cfg, manifest.tolerances)
    try:
        oracle = spectrum_at(params, options["n_fock"])
    except RabiSpectrumError as e:
        logger.error(f"oracle failed: {e}")
        return EXIT_NUMERICAL
    # baseline levels are exceptional: F0 has no zeros there
    reference = [
        x for x in oracle.x_values
        if cfg.xmin <= x <= cfg.xmax and nearest_pole_distance(params, x)[1] > cfg.pole_margin
    ]

    rows: List[Dict[str, object]] = []
    for i, (x_ref, x_f0, deviation) in enumerate(match_levels(reference, f0.xs)):
        rows.append({"level": i, "x_oracle": x_ref, "x_F0": x_f0, "dev_oracle": deviation})
    deviations = [row["dev_oracle"] for row in rows]

    if options.get("with_gfunction"):
        from src.core.gfunction import union_spectrum
        tagged = union_spectrum(params, cfg)
        g_xs = [point.x for point, _ in tagged]
        parities = {point.x: parity.value for point, parity in tagged}
        for row in rows:
            if row["x_F0"] is None:
                row.update({"x_G": None, "parity": None, "dev_G": math.inf})
            else:
                _, x_g, deviation = match_levels([row["x_F0"]], g_xs)[0]
                row.update({"x_G": x_g, "parity": parities.get(x_g), "dev_G": deviation})
            deviations.append(row["dev_G"])
        if len(g_xs) != len(f0.xs):
            logger.warning(f"G+/- found {len(g_xs)} zeros, F0 found {len(f0.xs)}")
            deviations.append(math.inf)

    if len(reference) != len(f0.xs):
        logger.warning(f"oracle has {len(reference)} levels in the window, F0 has {len(f0.xs)} zeros")
        deviations.append(math.inf)
    max_deviation = max(deviations) if deviations else 0.0

    frame = pd.DataFrame(rows)
    summary = {
        "max_deviation": max_deviation,
        "tol": tol,
        "passed": max_deviation <= tol and not f0.failures,
        "oracle_levels": len(reference),
        "f0_zeros": len(f0.xs),
    }
    write_output(manifest, {"levels": rows, "summary": summary}, frame, _spectrum_diagnostics(f0))
    logger.info(f"max deviation {max_deviation:g} (tol {tol:g})")
    return EXIT_OK if summary["passed"] else EXIT_NUMERICAL


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    setup_logging(args.verbose)

    try:
        manifest = manifest_from_args(args)
    except ConfigurationError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog}: error: {e}\n")
        return EXIT_USAGE
    logger.debug(f"manifest: {manifest}")

    try:
        if args.command == "spectrum":
            return cmd_spectrum(manifest)
        if args.command == "evaluate":
            return cmd_evaluate(manifest, manifest.options["grid_points"])
        if args.command == "oracle":
            return cmd_oracle(manifest, manifest.options["n_fock"], manifest.options["levels"])
        return cmd_compare(manifest)
    except OSError as e:
        logger.error(f"cannot write output: {e}")
        return EXIT_USAGE
    except RabiSpectrumError as e:
        logger.error(f"numerical failure: {e}")
        return EXIT_NUMERICAL
