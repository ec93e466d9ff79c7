#!/usr/bin/env python3
"""
PC-LS command-line interface.

Usage:
    python -m pcls validate specs/full_default.json
    python -m pcls cov specs/full_default.json --grid 0:6:0.125 --out cov.csv
    python -m pcls simulate specs/full_default.json --paths 1000 --seed 7 --out paths.npz
    python -m pcls spectral-check specs/ls_only.json --pairs 50
    python -m pcls mc-check specs/full_default.json --paths 100000 --z 4
    python -m pcls spectral-dump specs/full_default.json --t 1.0 --u 1.5 --out masses.csv

Exit codes: 0 ok, 1 check failed, 2 usage or spec error, 3 non-PSD model,
4 unsupported method, 5 numeric failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from pcls import __version__
from pcls.config import get_config
from pcls.core import cov_matrix
from pcls.errors import CoverageError, DomainError, NonPSDModel, PCLSError, SpecValidationError
from pcls.montecarlo import METHODS, mc_check, simulate, write_report
from pcls.specfile import ModelSpecFile, load_model, validate_spec
from pcls.spectral import DiscreteSpectralGrid, spectral_check, spectral_dump

logger = logging.getLogger("pcls")

EXIT_CHECK_FAILED = 1


def setup_logging(verbose: bool = False):
    """Configure logging to stderr."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s [%(levelname)s] %(message)s',
        stream=sys.stderr,
        force=True,
    )


def parse_range(text: str) -> tuple[float, float, float]:
    """Parse 'start:stop:step'."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got '{text}'")
    return start, stop, step


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def resolve_grid(args, model, spec: ModelSpecFile) -> np.ndarray:
    """Time grid from --grid / --points, then the spec's run defaults, then two periods."""
    if getattr(args, "points", None):
        return np.atleast_1d(np.loadtxt(args.points, delimiter=",", ndmin=1)).ravel()
    if getattr(args, "grid", None):
        return model.partition.uniform_grid(*args.grid)
    if spec.run.points is not None:
        return np.asarray(spec.run.points, dtype=float)
    if spec.run.grid is not None:
        g = spec.run.grid
        return model.partition.uniform_grid(g.start, g.stop, g.step)
    step = float(np.min(model.partition.lengths)) / 8
    return model.partition.uniform_grid(0.0, 2 * model.partition.span, step)


def resolve_spectral_grid(args) -> Optional[DiscreteSpectralGrid]:
    ls_frequencies = None
    if args.ls_grid:
        lo, hi, step = args.ls_grid
        n = int(np.floor((hi - lo) / step + 1e-9))
        ls_frequencies = lo + step * np.arange(n + 1)
    if ls_frequencies is None and args.pc_size is None:
        return None
    return DiscreteSpectralGrid(ls_frequencies=ls_frequencies, pc_size=args.pc_size)


def emit(report: dict, out: Optional[str]):
    """Print a JSON report, and write it to --out when given."""
    print(json.dumps(report, indent=2, default=str))
    if out:
        write_report(report, out)


def cmd_validate(args) -> int:
    report = validate_spec(args.spec)
    emit(report, args.out)
    return 0 if report["valid"] else SpecValidationError.exit_code


def cmd_cov(args) -> int:
    model, spec = load_model(args.spec)
    grid = resolve_grid(args, model, spec)
    tol = args.tol if args.tol is not None else spec.run.tol
    cm = cov_matrix(model, grid, repair=args.repair, tol=tol)

    if args.out and Path(args.out).suffix == ".json":
        cm.to_json(args.out)
    elif args.out:
        cm.to_csv(args.out)
    else:
        cm.to_csv(sys.stdout)
    print(json.dumps({"pass": True, **cm.metadata()}), file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    model, spec = load_model(args.spec)
    grid = resolve_grid(args, model, spec)
    n_paths = args.paths if args.paths is not None else spec.run.paths
    seed = args.seed if args.seed is not None else spec.run.seed
    method = args.method or spec.run.method

    ensemble = simulate(model, grid, n_paths, seed, method)
    if args.out and Path(args.out).suffix == ".npz":
        ensemble.to_npz(args.out)
    elif args.out:
        ensemble.to_csv(args.out)
    else:
        ensemble.to_csv(sys.stdout)
    print(f"fingerprint {ensemble.fingerprint}", file=sys.stderr)
    return 0


def cmd_spectral_check(args) -> int:
    model, spec = load_model(args.spec)
    seed = args.seed if args.seed is not None else spec.run.seed
    try:
        report = spectral_check(model, n_pairs=args.pairs, seed=seed, tol=args.tol,
                                g=resolve_spectral_grid(args), periods=args.periods)
    except CoverageError as e:
        logger.error(f"{e}. Widen the frequency grid with --ls-grid LO:HI:STEP.")
        return e.exit_code
    emit(report, args.out)
    return 0 if report["pass"] else EXIT_CHECK_FAILED


def cmd_mc_check(args) -> int:
    model, spec = load_model(args.spec)
    grid = resolve_grid(args, model, spec)
    n_paths = args.paths if args.paths is not None else spec.run.paths
    seed = args.seed if args.seed is not None else spec.run.seed
    z = args.z if args.z is not None else (spec.run.z or get_config()["z"])
    method = args.method or spec.run.method

    report = mc_check(model, grid, n_paths, seed, z=z, method=method)
    logger.info(f"Checked {report['pairs']} pairs")
    emit(report, args.out)
    return 0 if report["failures"] == 0 else EXIT_CHECK_FAILED


def cmd_spectral_dump(args) -> int:
    model, _ = load_model(args.spec)
    g = resolve_spectral_grid(args)
    if args.out:
        with open(args.out, 'w', newline='') as f:
            rows = spectral_dump(model, g, args.t, args.u, f)
    else:
        rows = spectral_dump(model, g, args.t, args.u, sys.stdout)
    logger.info(f"Wrote {rows} spectral masses")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcls",
        description="PC-LS process toolkit - covariance, spectral and Monte Carlo checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m pcls validate specs/full_default.json
  python -m pcls cov specs/full_default.json --grid 0:6:0.125 --out cov.csv
  python -m pcls mc-check specs/full_default.json --paths 100000

Exit codes:
  0  success
  1  a check ran and failed (spectral-check, mc-check)
  2  usage error or invalid spec
  3  covariance matrix not PSD
  4  method not supported for this model
  5  numeric failure (eigen-solver, spectral coverage, lift, reconstruction)
        """
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_spec(p):
        p.add_argument("spec", help="Model spec file (JSON)")

    def add_grid(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--grid", type=parse_range, metavar="START:STOP:STEP",
                           help="Uniform time grid (START, STOP] with step STEP")
        group.add_argument("--points", metavar="FILE",
                           help="Time points, comma or newline separated")

    def add_spectral_grid(p):
        p.add_argument("--ls-grid", type=parse_range, metavar="LO:HI:STEP",
                       help="Frequency grid for density spectra (default: per family)")
        p.add_argument("--pc-size", type=positive_int,
                       help="Number of PC frequencies on [0, 2pi) (default: from the lag support)")

    p = sub.add_parser("validate", help="Validate a model spec")
    add_spec(p)
    p.add_argument("--out", help="Write the JSON report here")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("cov", help="Covariance matrix on a grid")
    add_spec(p)
    add_grid(p)
    p.add_argument("--repair", action="store_true",
                   help="Clip eigenvalues in [-tol*trace, 0) to zero")
    p.add_argument("--tol", type=float,
                   help=f"Relative PSD tolerance (default {get_config()['tol_psd']:g})")
    p.add_argument("--out", help="Output file, .csv or .json (default: CSV on stdout)")
    p.set_defaults(func=cmd_cov)

    p = sub.add_parser("simulate", help="Simulate sample paths")
    add_spec(p)
    add_grid(p)
    p.add_argument("--paths", type=positive_int, help="Number of paths")
    p.add_argument("--seed", type=int, help="Master seed")
    p.add_argument("--method", choices=METHODS, help="Simulation method")
    p.add_argument("--out", help="Output file, .npz or .csv (default: CSV on stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectral-check", help="Compare the spectral reconstruction with the covariance")
    add_spec(p)
    add_spectral_grid(p)
    p.add_argument("--pairs", type=positive_int, default=50, help="Random (t, u) pairs (default 50)")
    p.add_argument("--periods", type=positive_int, default=2,
                   help="Draw pairs from (0, PERIODS * S] (default 2)")
    p.add_argument("--seed", type=int, help="Seed for the pairs")
    p.add_argument("--tol", type=float,
                   help=f"Tolerance (default {get_config()['tol_spec_atomic']:g} atomic, "
                        f"{get_config()['tol_spec_density']:g} density)")
    p.add_argument("--out", help="Write the JSON report here")
    p.set_defaults(func=cmd_spectral_check)

    p = sub.add_parser("mc-check", help="Monte Carlo check of the covariance")
    add_spec(p)
    add_grid(p)
    p.add_argument("--paths", type=positive_int, help="Number of paths")
    p.add_argument("--seed", type=int, help="Master seed")
    p.add_argument("--z", type=float, help=f"z-score threshold (default {get_config()['z']:g})")
    p.add_argument("--method", choices=METHODS, help="Simulation method")
    p.add_argument("--out", help="Write the JSON report here")
    p.set_defaults(func=cmd_mc_check)

    p = sub.add_parser("spectral-dump", help="Write the F and Theta masses at (t, u) as CSV")
    add_spec(p)
    add_spectral_grid(p)
    p.add_argument("--t", type=float, required=True, help="First time point")
    p.add_argument("--u", type=float, required=True, help="Second time point")
    p.add_argument("--out", help="Output CSV (default: stdout)")
    p.set_defaults(func=cmd_spectral_dump)

    return parser


def main(argv: Optional[list] = None) -> int:
    """Run a subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.verbose)

    try:
        return args.func(args)
    except SpecValidationError as e:
        print(json.dumps({"valid": False, "diagnostics": e.diagnostics}, indent=2))
        return e.exit_code
    except NonPSDModel as e:
        logger.error(f"{e} (min eigenvalue {e.min_eigenvalue:.6e})")
        return e.exit_code
    except PCLSError as e:
        logger.error(str(e))
        return e.exit_code
    except (OSError, ValueError) as e:
        logger.error(str(e))
        return DomainError.exit_code


if __name__ == "__main__":
    sys.exit(main())
