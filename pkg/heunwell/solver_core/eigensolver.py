"""
Bound-state energies as zeros of the Wronskian W(Psi_1, Psi_3) at a match point.

Psi_1 decays to the left and Psi_3 to the right; they are linearly dependent,
and W vanishes, exactly at the bound-state energies. The z-form equation has
no first-derivative term, so the raw Wronskian does not depend on where it
is evaluated.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.integrate import simpson

from ..errors import DomainError, MatchFailure, NotConvergedError
from ..model_core.model import EnergyLike, WellParameters, energy_search_ceiling, energy_value, xi_pair
from ..series_core.frobenius import OVERLAP_MARGIN, BranchSpec, SSign, build_local_solution, eval_psi, eval_psi_batch
from ..series_core.heun import SeriesControl

logger = logging.getLogger(__name__)

DECAY_TARGET = 1e-9
MAX_Z_SPAN = 200.0
MIN_MATCH_SCALE = 1e-300
MAX_BISECTION_STEPS = 200


class SolveOptions(BaseModel):
    """Controls for the energy scan, refinement and wavefunction sampling."""

    model_config = ConfigDict(frozen=True)

    z_match: float = 0.2
    grid_points: int = 2000
    refine_tol: float = 1e-10
    E_floor: float = 1e-6
    ceiling_override: Optional[float] = None
    s_sign: SSign = SSign.MINUS
    wavefunction_step: float = 0.005
    series: SeriesControl = SeriesControl()

    @model_validator(mode="after")
    def _check_options(self) -> "SolveOptions":
        xi, xip = xi_pair(self.z_match)
        if not (OVERLAP_MARGIN < float(xi) < 1.0 - OVERLAP_MARGIN and float(xip) > OVERLAP_MARGIN):
            raise ValueError(f"z_match={self.z_match} maps outside the overlap region "
                             f"({OVERLAP_MARGIN}, {1.0 - OVERLAP_MARGIN}) in xi")
        if self.grid_points < 10:
            raise ValueError(f"grid_points must be >= 10, got {self.grid_points}")
        if not self.refine_tol > 0:
            raise ValueError(f"refine_tol must be positive, got {self.refine_tol}")
        if not self.E_floor > 0:
            raise ValueError(f"E_floor must be positive, got {self.E_floor}")
        if self.ceiling_override is not None and self.ceiling_override < 0:
            raise ValueError(f"ceiling_override must be non-negative, got {self.ceiling_override}")
        if not self.wavefunction_step > 0:
            raise ValueError(f"wavefunction_step must be positive, got {self.wavefunction_step}")
        return self


class EigenResult(BaseModel):
    """Refined bound-state energies, in increasing order."""

    model_config = ConfigDict(frozen=True)

    params: WellParameters
    energies: List[float] = []
    wronskian_residuals: List[float] = []
    brackets: List[Tuple[float, float]] = []
    diagnostics: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _check_order(self) -> "EigenResult":
        if any(b <= a for a, b in zip(self.energies, self.energies[1:])):
            raise ValueError("Energies must be strictly increasing")
        return self

    @property
    def count(self) -> int:
        return len(self.energies)

    @property
    def epsilons(self) -> Optional[List[float]]:
        """Energies in units of 2m/hbar^2 when the well was given dimensionally."""
        if self.params.L is None:
            return None
        L2 = self.params.L * self.params.L
        return [-e / L2 for e in self.energies]


@dataclass
class Wavefunction:
    """A normalized eigenfunction sampled on a symmetric z grid."""

    energy: float
    z: NDArray[np.float64]
    psi: NDArray[np.float64]
    z_match: Optional[float]
    scale: float
    derivative_mismatch: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def norm(self) -> float:
        return float(simpson(self.psi * self.psi, x=self.z))


@dataclass
class WronskianSweep:
    """Normalized Wronskian over a batch of energies, with per-energy convergence."""

    energies: NDArray[np.float64]
    values: NDArray[np.float64]
    converged: NDArray[np.bool_]
    terms_used: NDArray[np.int64]


def _normalize(psi1, dpsi1, psi3, dpsi3, normalized: bool):
    w = psi1 * dpsi3 - psi3 * dpsi1
    if not normalized:
        return w
    return w / ((np.abs(psi1) + np.abs(dpsi1)) * (np.abs(psi3) + np.abs(dpsi3)))


def wronskian(p: WellParameters, E: EnergyLike, z_match: float = 0.2,
              ctl: Optional[SeriesControl] = None, s_sign: SSign = SSign.MINUS,
              normalized: bool = True) -> float:
    """
    Wronskian Psi_1 Psi_3' - Psi_3 Psi_1' at z_match.

    Args:
        p: Well parameters
        E: Energy, must be positive
        z_match: Match point inside both convergence regions
        ctl: Series truncation controls
        s_sign: Sign of s used by both local solutions
        normalized: Divide by (|Psi_1|+|Psi_1'|)(|Psi_3|+|Psi_3'|); zeros do not move

    Returns:
        float: The (normalized) Wronskian

    Raises:
        DomainError: If E <= 0 or z_match is outside the overlap region
        NotConvergedError: If either series fails to converge
    """
    psi1, dpsi1 = eval_psi(build_local_solution(p, E, BranchSpec.psi(1, s_sign)), z_match, ctl)
    psi3, dpsi3 = eval_psi(build_local_solution(p, E, BranchSpec.psi(3, s_sign)), z_match, ctl)
    return float(_normalize(psi1, dpsi1, psi3, dpsi3, normalized))


def wronskian_sweep(p: WellParameters, energies: ArrayLike, z_match: float = 0.2,
                    ctl: Optional[SeriesControl] = None, s_sign: SSign = SSign.MINUS,
                    normalized: bool = True) -> WronskianSweep:
    """Evaluate the Wronskian over many energies at once. Never raises on non-convergence."""
    e = np.atleast_1d(np.asarray(energies, dtype=float))
    left = eval_psi_batch(p, e, z_match, BranchSpec.psi(1, s_sign), ctl)
    right = eval_psi_batch(p, e, z_match, BranchSpec.psi(3, s_sign), ctl)
    with np.errstate(invalid="ignore", divide="ignore"):
        values = _normalize(left.psi, left.dpsi_dz, right.psi, right.dpsi_dz, normalized)
    return WronskianSweep(
        energies=e,
        values=values,
        converged=left.converged & right.converged,
        terms_used=np.maximum(left.terms_used, right.terms_used),
    )


def _checked_sweep(p: WellParameters, energies: NDArray[np.float64], opts: SolveOptions) -> WronskianSweep:
    sweep = wronskian_sweep(p, energies, opts.z_match, opts.series, opts.s_sign)
    failed = ~sweep.converged | ~np.isfinite(sweep.values)
    if np.any(failed):
        bad = energies[failed]
        logger.error(f"Wronskian series failed at {bad.size} energies for {p.as_tuple()}, "
                     f"first at E={bad[0]:.6g}")
        raise NotConvergedError(f"Series did not converge at {bad.size} energies (first E={bad[0]:.6g})",
                                partial=bad.tolist())
    return sweep


def _bisect(p: WellParameters, lo: NDArray[np.float64], hi: NDArray[np.float64],
            w_lo: NDArray[np.float64], opts: SolveOptions) -> Tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Refine all brackets together until each is narrower than refine_tol."""
    lo, hi, w_lo = lo.copy(), hi.copy(), w_lo.copy()
    neg_lo = np.signbit(w_lo)
    steps = 0
    terms_max = 0
    while np.max(hi - lo) > opts.refine_tol and steps < MAX_BISECTION_STEPS:
        mid = 0.5 * (lo + hi)
        sweep = _checked_sweep(p, mid, opts)
        terms_max = max(terms_max, int(sweep.terms_used.max()))
        same = np.signbit(sweep.values) == neg_lo
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
        steps += 1
    logger.debug(f"Refined {lo.size} brackets in {steps} bisection steps")
    return lo, hi, terms_max


@dataclass
class EnergyScan:
    """The normalized Wronskian on the uniform energy grid and its sign-change cells."""

    ceiling: float
    grid: NDArray[np.float64]
    values: NDArray[np.float64]
    cells: NDArray[np.int64]
    terms_used_max: int = 0


def scan_energy_grid(p: WellParameters, opts: Optional[SolveOptions] = None) -> EnergyScan:
    """
    Sample the Wronskian on grid_points energies in [E_floor, ceiling].

    cells[k] = i means the sign changes between grid[i] and grid[i + 1].
    The scan is empty when the ceiling does not exceed E_floor.

    Raises:
        NotConvergedError: If the series fails at any grid energy
    """
    opts = opts or SolveOptions()
    ceiling = opts.ceiling_override if opts.ceiling_override is not None else energy_search_ceiling(p)
    logger.debug(f"Scanning {p.as_tuple()} up to E={ceiling:.6g}")
    if ceiling <= opts.E_floor:
        logger.debug(f"No bound states possible for {p.as_tuple()}")
        empty = np.empty(0)
        return EnergyScan(ceiling=ceiling, grid=empty, values=empty, cells=np.empty(0, dtype=np.int64))

    grid = np.linspace(opts.E_floor, ceiling, opts.grid_points)
    sweep = _checked_sweep(p, grid, opts)
    negative = np.signbit(sweep.values)
    cells = np.flatnonzero(negative[:-1] != negative[1:])
    return EnergyScan(ceiling=ceiling, grid=grid, values=sweep.values, cells=cells,
                      terms_used_max=int(sweep.terms_used.max()))


def find_eigenvalues(p: WellParameters, opts: Optional[SolveOptions] = None) -> EigenResult:
    """
    Locate every bound state between E_floor and the search ceiling.

    The normalized Wronskian is sampled on a uniform grid of grid_points
    energies; every sign change is refined by bisection until the bracket is
    narrower than refine_tol. Sign changes in adjacent grid cells are
    reported as too-coarse brackets in the diagnostics, since roots may have
    been missed between them.

    Args:
        p: Well parameters
        opts: Solve options

    Returns:
        EigenResult: Empty when the ceiling is 0 or no sign change is found

    Raises:
        NotConvergedError: If the series fails at any scanned energy
    """
    opts = opts or SolveOptions()
    scan = scan_energy_grid(p, opts)
    diagnostics: Dict[str, Any] = {
        "ceiling": scan.ceiling,
        "grid_points": opts.grid_points,
        "z_match": opts.z_match,
        "s_sign": opts.s_sign.value,
        "terms_used_max": scan.terms_used_max,
        "bracket_too_coarse": [],
    }
    cells = scan.cells
    if cells.size == 0:
        logger.info(f"No bound states found for {p.as_tuple()}")
        return EigenResult(params=p, diagnostics=diagnostics)

    grid = scan.grid
    adjacent = cells[1:][np.diff(cells) == 1]
    for cell in adjacent:
        logger.warning(f"BracketTooCoarse: sign changes in adjacent cells near E={grid[cell]:.6g}, "
                       f"increase grid_points")
        diagnostics["bracket_too_coarse"].append([float(grid[cell - 1]), float(grid[cell + 1])])

    brackets = [(float(grid[i]), float(grid[i + 1])) for i in cells]
    lo, hi, refine_terms = _bisect(p, grid[cells], grid[cells + 1], scan.values[cells], opts)
    energies = 0.5 * (lo + hi)
    final = _checked_sweep(p, energies, opts)
    diagnostics["terms_used_max"] = max(diagnostics["terms_used_max"], refine_terms,
                                        int(final.terms_used.max()))

    result = EigenResult(
        params=p,
        energies=[float(e) for e in energies],
        wronskian_residuals=[float(abs(w)) for w in final.values],
        brackets=brackets,
        diagnostics=diagnostics,
    )
    logger.info(f"Found {result.count} bound states for {p.as_tuple()}: "
                f"{', '.join(f'{e:.6f}' for e in result.energies)}")
    return result


def wavefunction_span(E: float) -> float:
    """Half-width where e^{-sqrt(E) z} drops below 1e-9, capped at MAX_Z_SPAN."""
    span = math.log(1.0 / DECAY_TARGET) / math.sqrt(E)
    if span > MAX_Z_SPAN:
        logger.debug(f"Wavefunction span {span:.1f} at E={E:.3g} capped at {MAX_Z_SPAN}")
        return MAX_Z_SPAN
    return span


def symmetric_grid(E: float, step: float) -> NDArray[np.float64]:
    """Odd-length grid on [-span, span] with spacing step, containing z = 0."""
    half = int(math.ceil(wavefunction_span(E) / step))
    return np.linspace(-half * step, half * step, 2 * half + 1)


def assemble_wavefunction(p: WellParameters, E: EnergyLike, opts: Optional[SolveOptions] = None) -> Wavefunction:
    """
    Join Psi_1 (z <= z_match) and D Psi_3 (z > z_match) into a normalized eigenfunction.

    D = Psi_1(z_match)/Psi_3(z_match). The grid is symmetric about z = 0 and
    includes it. Normalization uses Simpson quadrature. The overall sign
    makes the largest-magnitude sample positive.

    Args:
        p: Well parameters
        E: A refined eigenvalue
        opts: Solve options (z_match, s_sign, wavefunction_step, series)

    Returns:
        Wavefunction: Normalized samples and the matching diagnostics

    Raises:
        DomainError: If E <= 0
        MatchFailure: If |Psi_3(z_match)| < 1e-300
        NotConvergedError: If any sample's series fails to converge
    """
    opts = opts or SolveOptions()
    e = energy_value(E)
    if e <= 0:
        raise DomainError(f"Wavefunctions need E > 0, got E={e}")

    left_sol = build_local_solution(p, e, BranchSpec.psi(1, opts.s_sign))
    right_sol = build_local_solution(p, e, BranchSpec.psi(3, opts.s_sign))
    psi1_m, dpsi1_m = eval_psi(left_sol, opts.z_match, opts.series)
    psi3_m, dpsi3_m = eval_psi(right_sol, opts.z_match, opts.series)
    if abs(psi3_m) < MIN_MATCH_SCALE:
        logger.error(f"Psi_3 vanishes at z_match={opts.z_match} for E={e}")
        raise MatchFailure(f"|Psi_3(z_match)| < {MIN_MATCH_SCALE} at z_match={opts.z_match}; move the match point")
    scale = psi1_m / psi3_m
    mismatch = abs(dpsi1_m - scale * dpsi3_m) / max(abs(dpsi1_m), np.finfo(float).tiny)

    z = symmetric_grid(e, opts.wavefunction_step)
    left = z <= opts.z_match

    left_batch = eval_psi_batch(p, e, z[left], BranchSpec.psi(1, opts.s_sign), opts.series)
    right_batch = eval_psi_batch(p, e, z[~left], BranchSpec.psi(3, opts.s_sign), opts.series)
    if not (left_batch.converged.all() and right_batch.converged.all()):
        raise NotConvergedError(f"Wavefunction series did not converge at E={e}")

    psi = np.concatenate([left_batch.psi, scale * right_batch.psi])
    norm = float(simpson(psi * psi, x=z))
    if not norm > 0:
        raise MatchFailure(f"Wavefunction at E={e} has zero norm")
    psi = psi / math.sqrt(norm)
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi

    logger.debug(f"Assembled wavefunction at E={e:.8f}: span {z[-1]:.2f}, {z.size} samples, D={scale:.6g}")
    return Wavefunction(
        energy=e,
        z=z,
        psi=psi,
        z_match=opts.z_match,
        scale=scale,
        derivative_mismatch=mismatch,
        diagnostics={"norm_before": norm, "samples": int(z.size)},
    )
