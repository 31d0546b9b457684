"""
heunwell - Bound states of the hyperbolic asymmetric double well from confluent Heun series
"""

from .errors import ConfigError, DomainError, HeunWellError, MatchFailure, NotConvergedError
from .model_core.model import Coordinate, Energy, WellParameters, energy_search_ceiling, potential_u
from .series_core.heun import HeunParameters, SeriesControl, SeriesResult, eval_heun
from .series_core.frobenius import BranchSpec, SSign, build_local_solution, eval_psi
from .solver_core.eigensolver import EigenResult, SolveOptions, assemble_wavefunction, find_eigenvalues, wronskian
from .solver_core.qes import analytic_energy, solve_w2_for_termination
from .solver_core.spectrum_solver import BaseSpectrumSolver, SpectrumSolver
from .solver_core.threshold import ThresholdMap, count_bound_states, threshold_scan
from .oracle_core.fd_oracle import FdGrid, fd_count_negative, fd_spectrum
from .report_core.report_helper import ReportHelper

__version__ = "0.1.0"
__all__ = [
    "ConfigError",
    "DomainError",
    "HeunWellError",
    "MatchFailure",
    "NotConvergedError",
    "Coordinate",
    "Energy",
    "WellParameters",
    "energy_search_ceiling",
    "potential_u",
    "HeunParameters",
    "SeriesControl",
    "SeriesResult",
    "eval_heun",
    "BranchSpec",
    "SSign",
    "build_local_solution",
    "eval_psi",
    "EigenResult",
    "SolveOptions",
    "assemble_wavefunction",
    "find_eigenvalues",
    "wronskian",
    "analytic_energy",
    "solve_w2_for_termination",
    "BaseSpectrumSolver",
    "SpectrumSolver",
    "ThresholdMap",
    "count_bound_states",
    "threshold_scan",
    "FdGrid",
    "fd_count_negative",
    "fd_spectrum",
    "ReportHelper",
]
