"""
Quasi-exactly solvable parameter sets.

On the expansion about xi = 0 with r = q (alpha = 2s, beta = gamma = 2q,
delta = -2 w3) the Heun series truncates to a polynomial of degree N when
    delta = -alpha (N + 1 + (beta + gamma)/2)      (fixes q, hence E)
    c_{N+1} = 0                                     (fixes w2 through eta)
The first condition reads -2 w3 = -2s (N + 1 + 2q), so
    q = (w3/s - (N + 1))/2,   E = 4 q^2,
with a bound state only when q > 0.
"""

import math
import logging
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.optimize import brentq

from ..errors import DomainError
from ..model_core.model import Energy, WellParameters, xi_pair
from ..series_core.frobenius import ExponentChoice, SSign
from ..series_core.heun import HeunParameters, heun_coefficients, termination_residual
from .eigensolver import Wavefunction, symmetric_grid

logger = logging.getLogger(__name__)

DEFAULT_W2_CAP = 200.0
DEFAULT_SCAN_CELLS = 4000
TAIL_LENGTH = 20
ROOT_XTOL = 1e-13
ROOT_MAX_ITER = 200


class QesBranch(BaseModel):
    """A polynomial order and sign choice on the r = q expansion about xi = 0."""

    model_config = ConfigDict(frozen=True)

    N: int
    s_sign: SSign = SSign.PLUS
    exponent_choice: ExponentChoice = ExponentChoice.R_EQ_Q

    @model_validator(mode="after")
    def _check_branch(self) -> "QesBranch":
        if self.N < 0:
            raise ValueError(f"Polynomial order must be non-negative, got N={self.N}")
        if self.exponent_choice is not ExponentChoice.R_EQ_Q:
            raise ValueError("Only the r = q branch is used for QES construction")
        return self

    def s(self, w1: float) -> float:
        if w1 <= 0:
            raise DomainError(f"QES construction needs w1 > 0, got w1={w1}")
        return self.s_sign.factor * 2.0 * math.sqrt(w1)

    def exponent(self, w1: float, w3: float) -> float:
        """q = (w3/s - (N + 1))/2, from delta = -alpha(N + 1 + (beta + gamma)/2)."""
        return 0.5 * (w3 / self.s(w1) - (self.N + 1))

    def heun_parameters(self, w1: float, w2: float, w3: float) -> HeunParameters:
        s = self.s(w1)
        q = self.exponent(w1, w3)
        return HeunParameters(alpha=2.0 * s, beta=2.0 * q, gamma=2.0 * q,
                              delta=-2.0 * w3, eta=-2.0 * w1 + w2 + w3 + 2.0 * q * q)


class TruncationReport(BaseModel):
    """How well a constructed parameter set actually truncates."""

    model_config = ConfigDict(frozen=True)

    N: int
    residual: float
    coefficient_scale: float
    tail: List[float]

    @property
    def relative_tail(self) -> float:
        return max(abs(c) for c in self.tail) / self.coefficient_scale

    def is_truncated(self, residual_tol: float = 1e-12, tail_tol: float = 1e-10) -> bool:
        return (abs(self.residual) <= residual_tol * self.coefficient_scale
                and self.relative_tail <= tail_tol)


def analytic_energy(w1: float, w3: float, N: int, s_sign: SSign = SSign.PLUS) -> Optional[Energy]:
    """
    Closed-form QES energy for polynomial order N.

    Args:
        w1: Must be positive
        w3: Asymmetry strength
        N: Polynomial order
        s_sign: Sign of s = +-2 sqrt(w1)

    Returns:
        Energy: E = 4 q^2, or None when q <= 0 (no bound state on this branch)
    """
    q = QesBranch(N=N, s_sign=s_sign).exponent(w1, w3)
    if q <= 0:
        logger.debug(f"No QES bound state for w1={w1}, w3={w3}, N={N}, s {s_sign.value}: q={q:.6g}")
        return None
    return Energy(E=4.0 * q * q)


def _residual_at(branch: QesBranch, w1: float, w2: float, w3: float) -> float:
    return termination_residual(branch.heun_parameters(w1, w2, w3), branch.N)


def solve_w2_for_termination(w1: float, w3: float, N: int, s_sign: SSign = SSign.PLUS,
                             w2_cap: float = DEFAULT_W2_CAP,
                             cells: int = DEFAULT_SCAN_CELLS) -> List[Tuple[float, Energy]]:
    """
    Find every w2 in [-w2_cap, w2_cap] where c_{N+1} vanishes.

    c_{N+1} is a polynomial of degree N + 1 in eta, and w2 enters only
    through eta, so at most N + 1 roots exist. Roots are bracketed on a
    uniform grid of `cells` cells and refined with Brent's method.

    Returns:
        List of (w2, E) pairs in increasing w2; empty if no sign change

    Raises:
        DomainError: If w1 <= 0 or the branch admits no bound state
    """
    branch = QesBranch(N=N, s_sign=s_sign)
    energy = analytic_energy(w1, w3, N, s_sign)
    if energy is None:
        raise DomainError(f"No admissible QES energy for w1={w1}, w3={w3}, N={N}, s {s_sign.value}")

    grid = np.linspace(-w2_cap, w2_cap, cells + 1)
    residuals = np.array([_residual_at(branch, w1, w2, w3) for w2 in grid])
    roots: List[Tuple[float, Energy]] = []
    exact = np.flatnonzero(residuals == 0.0)
    for i in exact:
        roots.append((float(grid[i]), energy))

    negative = np.signbit(residuals)
    for i in np.flatnonzero((negative[:-1] != negative[1:]) & (residuals[:-1] != 0) & (residuals[1:] != 0)):
        w2 = brentq(lambda w: _residual_at(branch, w1, w, w3), float(grid[i]), float(grid[i + 1]),
                    xtol=ROOT_XTOL, maxiter=ROOT_MAX_ITER)
        roots.append((float(w2), energy))

    roots.sort(key=lambda pair: pair[0])
    if len(roots) > N + 1:
        logger.warning(f"Found {len(roots)} roots for N={N}, more than the degree bound {N + 1}")
    logger.info(f"QES N={N}, w1={w1}, w3={w3}: E={energy.E:.6g}, w2 roots {[round(w, 6) for w, _ in roots]}")
    return roots


def verify_truncation(p: WellParameters, N: int, s_sign: SSign = SSign.PLUS) -> TruncationReport:
    """
    Residual c_{N+1} and the tail c_{N+1} ... c_{N+20} for a constructed well.

    coefficient_scale is max |c_n| over 0 <= n <= N.
    """
    branch = QesBranch(N=N, s_sign=s_sign)
    coeffs = heun_coefficients(branch.heun_parameters(p.w1, p.w2, p.w3), N + 1 + TAIL_LENGTH)
    scale = float(np.max(np.abs(coeffs[:N + 1])))
    tail = [float(c) for c in coeffs[N + 1:]]
    return TruncationReport(N=N, residual=tail[0], coefficient_scale=scale, tail=tail)


def qes_wavefunction(p: WellParameters, N: int, s_sign: SSign = SSign.PLUS,
                     step: float = 0.005) -> Wavefunction:
    """
    Normalized closed-form eigenfunction xi^q (1 - xi)^q e^{s xi} sum_{n<=N} c_n xi^n.

    Sampled on the same symmetric grid assemble_wavefunction uses for this
    energy, so the two can be compared sample by sample.
    """
    branch = QesBranch(N=N, s_sign=s_sign)
    q = branch.exponent(p.w1, p.w3)
    if q <= 0:
        raise DomainError(f"No admissible QES energy for {p.as_tuple()} at N={N}")
    energy = 4.0 * q * q
    coeffs = heun_coefficients(branch.heun_parameters(p.w1, p.w2, p.w3), N + 1)

    z: NDArray[np.float64] = symmetric_grid(energy, step)
    xi, xip = xi_pair(z)
    polynomial = np.polynomial.polynomial.polyval(xi, coeffs)
    psi = np.power(xi * xip, q) * np.exp(branch.s(p.w1) * xi) * polynomial

    wave = Wavefunction(energy=energy, z=z, psi=psi, z_match=None, scale=1.0, derivative_mismatch=0.0,
                        diagnostics={"closed_form": True, "N": N})
    norm = wave.norm()
    psi = psi / math.sqrt(norm)
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    wave.psi = psi
    return wave
