"""
heunwell command line.

    heunwell solve --w1 15 --w2 12 --w3 1
    heunwell wronskian-sweep --preset asymmetric_well --E-max 5 --format csv --output sweep.csv
    heunwell threshold --preset threshold_w1_15 --output map.json
    heunwell oracle --w1 0 --w2 -12 --w3 0 -k 3

Exit status is 0 on success, 1 on invalid input and 2 when a series failed
to converge (partial output is still written and flagged).
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..errors import ConfigError, HeunWellError, NotConvergedError
from ..model_core.model import WellParameters, energy_search_ceiling
from ..report_core.report_helper import ReportHelper
from ..solver_core.eigensolver import (
    Wavefunction,
    assemble_wavefunction,
    find_eigenvalues,
    wronskian_sweep,
)
from ..solver_core.qes import analytic_energy, solve_w2_for_termination, verify_truncation
from ..solver_core.spectrum_solver import SpectrumSolver
from ..solver_core.threshold import threshold_scan
from .emitters import (
    curves_path,
    emit_eigen_result,
    emit_sweep,
    emit_table,
    emit_threshold,
    emit_wavefunctions,
)
from .run_config import RunConfig, build_run_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they share exit status 1."""

    def error(self, message: str):
        raise ConfigError(message)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    well = common.add_argument_group("well")
    for name in ("w1", "w2", "w3"):
        well.add_argument(f"--{name}", type=float, help=f"Dimensionless strength {name}")
    for name in ("V1", "V2", "V3"):
        well.add_argument(f"--{name}", type=float, help=f"Dimensional strength {name} (needs --L)")
    well.add_argument("--L", type=float, help="Length scale for dimensional input")
    well.add_argument("--preset", help="Named well or threshold preset")

    io = common.add_argument_group("input/output")
    io.add_argument("--config", type=Path, help="YAML file of flag values (flags override it)")
    io.add_argument("--templates", type=Path, help="YAML file or directory of extra presets/report templates")
    io.add_argument("--output", type=Path, help="Output file (stdout when omitted)")
    io.add_argument("--format", choices=["csv", "json"], help="Output format (default json)")
    io.add_argument("--log-level", default="WARNING",
                    choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], help="Logging level")

    num = common.add_argument_group("numerics")
    num.add_argument("--z-match", type=float, help="Matching point in z (default 0.2)")
    num.add_argument("--grid-points", type=int, help="Energy scan grid size (default 2000)")
    num.add_argument("--refine-tol", type=float, help="Bisection bracket width (default 1e-10)")
    num.add_argument("--E-floor", type=float, help="Lowest scanned energy (default 1e-6)")
    num.add_argument("--ceiling", type=float, help="Override the energy search ceiling")
    num.add_argument("--s-sign", choices=["plus", "minus"], help="Branch of s = +-2 sqrt(w1) (default minus)")
    num.add_argument("--max-terms", type=int, help="Series term cap (default 5000)")
    num.add_argument("--tail-tol", type=float, help="Series tail tolerance (default 1e-14)")
    num.add_argument("--tail-window", type=int, help="Consecutive small terms before stopping (default 4)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = _Parser(prog="heunwell", description="Bound states of the hyperbolic asymmetric double well")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("solve", parents=[common], help="Bound-state energies")

    sweep = sub.add_parser("wronskian-sweep", parents=[common], help="Table of W(E)")
    sweep.add_argument("--E-min", type=float, help="Lowest energy (default E floor)")
    sweep.add_argument("--E-max", type=float, help="Highest energy (default search ceiling)")
    sweep.add_argument("--points", type=int, help="Number of energies (default 400)")

    wave = sub.add_parser("wavefunction", parents=[common], help="Normalized eigenfunctions")
    wave.add_argument("--step", type=float, help="Sample spacing in z (default 0.005)")

    thr = sub.add_parser("threshold", parents=[common], help="Bound-state counts over (w2, w3)")
    for name in ("w2", "w3"):
        thr.add_argument(f"--{name}-min", type=float, help=f"Lower {name} bound (default -30)")
        thr.add_argument(f"--{name}-max", type=float, help=f"Upper {name} bound (default 30)")
    thr.add_argument("--resolution", type=int, help="Nodes per axis (default 60)")
    thr.add_argument("--workers", type=int, help="Worker cap (default HEUNWELL_THREADS)")

    qes = sub.add_parser("qes", parents=[common], help="Quasi-exactly solvable wells")
    qes.add_argument("-N", "--order", type=int, help="Polynomial order (default 0)")
    qes.add_argument("--w2-cap", type=float, help="Search w2 in [-cap, cap] (default 200)")
    qes.add_argument("--qes-sign", choices=["plus", "minus"], help="Branch of s (default plus)")

    oracle = sub.add_parser("oracle", parents=[common], help="Compare with finite differences")
    oracle.add_argument("-k", type=int, help="Number of levels (default 10)")
    oracle.add_argument("--fd-z-span", type=float, help="Finite-difference half-width (default 25)")
    oracle.add_argument("--fd-points", type=int, help="Finite-difference grid points, odd (default 10001)")
    return parser


def _path_text(path: Optional[Path]) -> Optional[str]:
    return None if path is None else str(path)


def run_solve(config: RunConfig, reports: ReportHelper) -> int:
    result = find_eigenvalues(config.params, config.solve)
    print(reports.render("solve", w1=config.params.w1, w2=config.params.w2, w3=config.params.w3,
                         energies=result.energies, epsilons=result.epsilons), end="")
    if config.output is not None:
        emit_eigen_result(result, config.output, config.format)
    return EXIT_OK


def run_wronskian_sweep(config: RunConfig, reports: ReportHelper) -> int:
    opts = config.solve
    e_min = config.E_min if config.E_min is not None else opts.E_floor
    if config.E_max is not None:
        e_max = config.E_max
    else:
        e_max = opts.ceiling_override if opts.ceiling_override is not None else energy_search_ceiling(config.params)
    if not 0 < e_min < e_max:
        raise ConfigError(f"Need 0 < E-min < E-max, got [{e_min}, {e_max}] (pass --E-max for wells without bound states)")
    if config.points < 2:
        raise ConfigError(f"points must be >= 2, got {config.points}")

    sweep = wronskian_sweep(config.params, np.linspace(e_min, e_max, config.points),
                            opts.z_match, opts.series, opts.s_sign)
    emit_sweep(sweep, config.output, config.format)
    ok = sweep.converged & np.isfinite(sweep.values)
    negative = np.signbit(sweep.values[ok])
    changes = int(np.count_nonzero(negative[:-1] != negative[1:]))
    if config.output is not None:
        print(reports.render("wronskian_sweep", count=sweep.energies.size, e_min=e_min, e_max=e_max,
                             sign_changes=changes, path=_path_text(config.output)), end="")
    if not ok.all():
        logger.error(f"Wronskian not converged at {int((~ok).sum())} of {ok.size} energies")
        print(f"error: series did not converge at {int((~ok).sum())} energies; "
              f"those rows have no W", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def run_wavefunction(config: RunConfig, reports: ReportHelper) -> int:
    result = find_eigenvalues(config.params, config.solve)
    waves: List[Wavefunction] = [assemble_wavefunction(config.params, e, config.solve) for e in result.energies]
    emit_wavefunctions(waves, config.output, config.format)
    if config.output is not None:
        samples = sum(w.z.size for w in waves)
        print(reports.render("wavefunction", energies=result.energies, samples=samples,
                             path=_path_text(config.output)), end="")
    return EXIT_OK


def run_threshold(config: RunConfig, reports: ReportHelper) -> int:
    tmap = threshold_scan(config.w1, config.w2_range, config.w3_range, config.resolution,
                          config.solve, config.workers)
    emit_threshold(tmap, config.output, config.format)
    good = tmap.counts.compressed()
    failed = int(tmap.failed.sum())
    if config.output is not None:
        path = str(config.output)
        if config.format == "csv":
            path = f"{path} and {curves_path(config.output)}"
        print(reports.render(
            "threshold", w1=config.w1, resolution=config.resolution,
            count_min=int(good.min()) if good.size else "-",
            count_max=int(good.max()) if good.size else "-",
            failed=failed,
            curves=[{"points": len(c.points), "level": c.emerging_level, "critical": c.critical}
                    for c in tmap.critical_curves],
            path=path,
        ), end="")
    if failed:
        print(f"error: {failed} threshold nodes failed and are left empty", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def run_qes(config: RunConfig, reports: ReportHelper) -> int:
    w1, w3, N, sign = config.w1, config.w3, config.order, config.qes_sign
    if w1 <= 0:
        raise ConfigError(f"QES construction needs w1 > 0, got {w1}")
    energy = analytic_energy(w1, w3, N, sign)
    pairs: List[Dict[str, Any]] = []
    if energy is not None:
        for w2, e in solve_w2_for_termination(w1, w3, N, sign, w2_cap=config.w2_cap):
            report = verify_truncation(WellParameters(w1=w1, w2=w2, w3=w3), N, sign)
            pairs.append({"w2": w2, "E": e.E, "residual": report.residual, "tail": report.relative_tail})
    print(reports.render("qes", N=N, w1=w1, w3=w3, energy=None if energy is None else energy.E,
                         pairs=pairs), end="")
    if config.output is not None:
        emit_table(config.output, config.format, ["w1", "w2", "w3", "E"],
                   [[w1, p["w2"], w3, p["E"]] for p in pairs])
    return EXIT_OK


def run_oracle(config: RunConfig, reports: ReportHelper) -> int:
    opts = config.solve
    wronskian_solver = SpectrumSolver.create(
        "wronskian", z_match=opts.z_match, grid_points=opts.grid_points, refine_tol=opts.refine_tol,
        E_floor=opts.E_floor, ceiling_override=opts.ceiling_override, s_sign=opts.s_sign,
        max_terms=opts.series.max_terms, tail_tol=opts.series.tail_tol, tail_window=opts.series.tail_window,
    )
    fd_solver = SpectrumSolver.create("fd", z_span=config.fd_grid.z_span, points=config.fd_grid.points,
                                      k=config.k)
    # both lists hold the k most strongly bound levels in increasing E
    series_levels = wronskian_solver.solve(config.params)[-config.k:]
    fd_levels = fd_solver.solve(config.params)

    rows = []
    for n in range(max(len(series_levels), len(fd_levels))):
        a = series_levels[n] if n < len(series_levels) else None
        b = fd_levels[n] if n < len(fd_levels) else None
        diff = a - b if a is not None and b is not None else None
        rows.append({"index": n, "wronskian": a, "fd": b, "diff": diff})
    print(reports.render("oracle", rows=rows), end="")
    if config.output is not None:
        emit_table(config.output, config.format, ["n", "E", "E_fd"],
                   [[r["index"], r["wronskian"], r["fd"]] for r in rows])
    return EXIT_OK


HANDLERS: Dict[str, Callable[[RunConfig, ReportHelper], int]] = {
    "solve": run_solve,
    "wronskian-sweep": run_wronskian_sweep,
    "wavefunction": run_wavefunction,
    "threshold": run_threshold,
    "qes": run_qes,
    "oracle": run_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        int: Exit status
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", level=getattr(logging, args.log_level))
    flags = vars(args).copy()
    command = flags.pop("command")
    flags.pop("log_level")

    try:
        reports = ReportHelper(flags.get("templates"))
        config = build_run_config(command, flags, reports)
        if config.templates is not None and config.templates != flags.get("templates"):
            reports = ReportHelper(config.templates)
        return HANDLERS[command](config, reports)
    except NotConvergedError as e:
        logger.debug(f"Partial result: {e.partial}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except HeunWellError as e:
        logger.error(f"{command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
