"""
Solver Core - Wronskian eigensolver, QES construction, threshold maps and the solver factory
"""

from .eigensolver import (
    EigenResult,
    EnergyScan,
    SolveOptions,
    Wavefunction,
    WronskianSweep,
    assemble_wavefunction,
    find_eigenvalues,
    scan_energy_grid,
    wronskian,
    wronskian_sweep,
)
from .node_scheduler import NodeScheduler
from .qes import (
    QesBranch,
    TruncationReport,
    analytic_energy,
    qes_wavefunction,
    solve_w2_for_termination,
    verify_truncation,
)
from .spectrum_solver import (
    BaseSpectrumSolver,
    FiniteDifferenceSpectrumSolver,
    SpectrumSolver,
    WronskianSpectrumSolver,
)
from .threshold import (
    CriticalCurve,
    ThresholdMap,
    count_bound_states,
    threshold_scan,
    threshold_scan_async,
    wronskian_at_zero_energy,
)

__all__ = [
    "EigenResult",
    "EnergyScan",
    "SolveOptions",
    "Wavefunction",
    "WronskianSweep",
    "assemble_wavefunction",
    "find_eigenvalues",
    "scan_energy_grid",
    "wronskian",
    "wronskian_sweep",
    "NodeScheduler",
    "QesBranch",
    "TruncationReport",
    "analytic_energy",
    "qes_wavefunction",
    "solve_w2_for_termination",
    "verify_truncation",
    "BaseSpectrumSolver",
    "FiniteDifferenceSpectrumSolver",
    "SpectrumSolver",
    "WronskianSpectrumSolver",
    "CriticalCurve",
    "ThresholdMap",
    "count_bound_states",
    "threshold_scan",
    "threshold_scan_async",
    "wronskian_at_zero_energy",
]
