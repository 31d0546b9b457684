"""
Series Core - Confluent Heun series and the local Frobenius solutions built on it
"""

from .heun import (
    HeunParameters,
    SeriesBatch,
    SeriesControl,
    SeriesResult,
    eval_heun,
    heun_coefficients,
    recurrence_coeffs,
    sum_series,
    termination_residual,
)
from .frobenius import (
    BranchSpec,
    ExpansionPoint,
    ExponentChoice,
    LocalSolution,
    PsiBatch,
    SSign,
    build_local_solution,
    eval_psi,
    eval_psi_batch,
    zero_energy_solution,
)

__all__ = [
    "HeunParameters",
    "SeriesBatch",
    "SeriesControl",
    "SeriesResult",
    "eval_heun",
    "heun_coefficients",
    "recurrence_coeffs",
    "sum_series",
    "termination_residual",
    "BranchSpec",
    "ExpansionPoint",
    "ExponentChoice",
    "LocalSolution",
    "PsiBatch",
    "SSign",
    "build_local_solution",
    "eval_psi",
    "eval_psi_batch",
    "zero_energy_solution",
]
