"""
Local Frobenius solutions of the transformed Schrodinger equation.

Every local solution has the form
    Psi = xi^q (1 - xi)^r e^{s xi} H(alpha, beta, gamma, delta, eta; u),
with u = xi about the singular point xi = 0 and u = 1 - xi about xi = 1,
q = +-sqrt(E)/2, r = +-q and s = +-2 sqrt(w1). The four solutions are

    Psi_1  about 0, r = q     (decays as z -> -inf)
    Psi_2  about 0, r = -q
    Psi_3  about 1, r = q     (decays as z -> +inf)
    Psi_4  about 1, r = -q
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict

from ..errors import DomainError, NotConvergedError
from ..model_core.model import EnergyLike, WellParameters, energy_value, xi_pair
from .heun import HeunParameters, SeriesControl, SeriesResult, sum_series

logger = logging.getLogger(__name__)

OVERLAP_MARGIN = 0.02


class ExpansionPoint(str, Enum):
    AT_ZERO = "at_zero"
    AT_ONE = "at_one"


class ExponentChoice(str, Enum):
    R_EQ_Q = "r_eq_q"
    R_EQ_MINUS_Q = "r_eq_minus_q"


class SSign(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def factor(self) -> float:
        return 1.0 if self is SSign.PLUS else -1.0


class BranchSpec(BaseModel):
    """Which of the four local solutions, and which sign of s."""

    model_config = ConfigDict(frozen=True)

    expansion_point: ExpansionPoint
    exponent_choice: ExponentChoice
    s_sign: SSign = SSign.MINUS

    @classmethod
    def psi(cls, index: int, s_sign: SSign = SSign.MINUS) -> "BranchSpec":
        """Branch of Psi_1 ... Psi_4."""
        layout = {
            1: (ExpansionPoint.AT_ZERO, ExponentChoice.R_EQ_Q),
            2: (ExpansionPoint.AT_ZERO, ExponentChoice.R_EQ_MINUS_Q),
            3: (ExpansionPoint.AT_ONE, ExponentChoice.R_EQ_Q),
            4: (ExpansionPoint.AT_ONE, ExponentChoice.R_EQ_MINUS_Q),
        }
        if index not in layout:
            raise ValueError(f"Local solutions are numbered 1-4, got {index}")
        point, choice = layout[index]
        return cls(expansion_point=point, exponent_choice=choice, s_sign=s_sign)

    @property
    def at_one(self) -> bool:
        return self.expansion_point is ExpansionPoint.AT_ONE

    @property
    def r_sign(self) -> float:
        return 1.0 if self.exponent_choice is ExponentChoice.R_EQ_Q else -1.0

    def s_value(self, w1: float) -> float:
        return self.s_sign.factor * 2.0 * math.sqrt(w1)


class LocalSolution(BaseModel):
    """
    A fully parameterized local solution.

    `scale` is the matching constant D_i multiplying the solution.
    `requires_polynomial` is set when beta <= -1 on this branch, where the
    plain series does not exist and only a terminating polynomial could
    represent the solution. Such solutions cannot be evaluated here.
    """

    model_config = ConfigDict(frozen=True)

    q: float
    r: float
    s: float
    hp: HeunParameters
    branch: BranchSpec
    scale: float = 1.0
    requires_polynomial: bool = False

    def with_scale(self, scale: float) -> "LocalSolution":
        return self.model_copy(update={"scale": scale})


@dataclass
class PsiBatch:
    """Unscaled Psi and dPsi/dz over a broadcast batch of (E, z)."""

    psi: NDArray[np.float64]
    dpsi_dz: NDArray[np.float64]
    converged: NDArray[np.bool_]
    terms_used: NDArray[np.int64]


def _branch_table(p: WellParameters, q: ArrayLike, r: ArrayLike, s: float, at_one: bool):
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    if at_one:
        return (np.full_like(q, -2.0 * s), 2.0 * r, 2.0 * q,
                np.full_like(q, 2.0 * p.w3), -2.0 * p.w1 + p.w2 - p.w3 + 2.0 * q * q)
    return (np.full_like(q, 2.0 * s), 2.0 * q, 2.0 * r,
            np.full_like(q, -2.0 * p.w3), -2.0 * p.w1 + p.w2 + p.w3 + 2.0 * q * q)


def _check_margin(at_one: bool, xi: NDArray[np.float64], xip: NDArray[np.float64], margin: float) -> None:
    # u = xi about 0 and u = 1 - xi about 1 must stay inside |u| < 1 - margin
    u = xip if at_one else xi
    if np.any(u >= 1.0 - margin):
        side = "xi = 1" if at_one else "xi = 0"
        raise DomainError(f"Point lies outside the convergence region of the expansion about {side} "
                          f"(margin {margin})")


def _evaluate(q: ArrayLike, r: ArrayLike, s: float, params, at_one: bool, z: ArrayLike,
              ctl: Optional[SeriesControl], margin: float) -> PsiBatch:
    q_arr, r_arr, z_arr = np.broadcast_arrays(*(np.atleast_1d(np.asarray(a, dtype=float)) for a in (q, r, z)))
    shape = z_arr.shape
    xi, xip = xi_pair(z_arr)
    _check_margin(at_one, xi, xip, margin)

    series = sum_series(*params, xip if at_one else xi, ctl)
    h = series.value.reshape(shape)
    dh_dxi = series.derivative.reshape(shape)
    if at_one:
        dh_dxi = -dh_dxi

    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        pref = np.power(xi, q_arr) * np.power(xip, r_arr) * np.exp(s * xi)
        psi = pref * h
        # d/dz = 2 xi xi' d/dxi
        dpsi = 2.0 * pref * ((q_arr * xip - r_arr * xi + s * xi * xip) * h + xi * xip * dh_dxi)

    return PsiBatch(psi=psi, dpsi_dz=dpsi, converged=series.converged.reshape(shape),
                    terms_used=series.terms_used.reshape(shape))


def _make_solution(p: WellParameters, q: float, b: BranchSpec) -> LocalSolution:
    r = b.r_sign * q
    s = b.s_value(p.w1)
    alpha, beta, gamma, delta, eta = (float(v) for v in _branch_table(p, q, r, s, b.at_one))
    hp = HeunParameters(alpha=alpha, beta=beta, gamma=gamma, delta=delta, eta=eta)
    return LocalSolution(q=q, r=r, s=s, hp=hp, branch=b, requires_polynomial=beta <= -1.0)


def branch_exponent(E: float, b: BranchSpec) -> float:
    """q for a branch: +sqrt(E)/2 for r = q, -sqrt(E)/2 for r = -q."""
    return b.r_sign * 0.5 * math.sqrt(E)


def build_local_solution(p: WellParameters, E: EnergyLike, b: BranchSpec) -> LocalSolution:
    """
    Fill the Heun parameters of one local solution at energy E.

    Args:
        p: Well parameters
        E: Energy, must be positive
        b: Branch selection

    Returns:
        LocalSolution: q = sqrt(E)/2 on the r = q branches (Psi_1, Psi_3),
        q = -sqrt(E)/2 on the r = -q branches (Psi_2, Psi_4)

    Raises:
        DomainError: If E <= 0 or w1 < 0
    """
    e = energy_value(E)
    if e <= 0:
        raise DomainError(f"Local solutions need E > 0, got E={e}")
    if p.w1 < 0:
        raise DomainError(f"w1 must be non-negative, got w1={p.w1}")
    sol = _make_solution(p, branch_exponent(e, b), b)
    if sol.requires_polynomial:
        logger.debug(f"Branch {b.expansion_point.value}/{b.exponent_choice.value} at E={e} has "
                     f"beta={sol.hp.beta:.4g} <= -1, needs polynomial truncation")
    return sol


def zero_energy_solution(p: WellParameters, b: BranchSpec) -> LocalSolution:
    """The q = 0 solution: prefactors reduce to e^{s xi} and beta = gamma = 0."""
    if p.w1 < 0:
        raise DomainError(f"w1 must be non-negative, got w1={p.w1}")
    return _make_solution(p, 0.0, b)


def eval_psi(sol: LocalSolution, z: float, ctl: Optional[SeriesControl] = None,
             margin: float = OVERLAP_MARGIN, strict: bool = True) -> Tuple[float, float]:
    """
    Evaluate (Psi, dPsi/dz) of a local solution at z, scaled by sol.scale.

    On the s > 0 branches e^{s xi} and the series cancel, so Psi carries
    roughly four fewer significant digits than on s < 0. dPsi/dz is formed
    analytically and keeps its accuracy; finite differences of Psi do not.

    Args:
        sol: Local solution
        z: Coordinate inside the expansion's convergence region
        ctl: Series truncation controls
        margin: Distance kept from the far singular point
        strict: Raise on non-convergence instead of warning

    Returns:
        Tuple[float, float]: psi and dpsi_dz

    Raises:
        DomainError: Outside the margin, or on a branch needing polynomial truncation
        NotConvergedError: If the series did not converge and strict is set
    """
    if sol.requires_polynomial:
        raise DomainError(f"beta={sol.hp.beta} <= -1: this branch has no plain series solution")
    batch = _evaluate(sol.q, sol.r, sol.s, sol.hp.as_tuple(), sol.branch.at_one, z, ctl, margin)
    psi = float(batch.psi[0]) * sol.scale
    dpsi = float(batch.dpsi_dz[0]) * sol.scale
    if not batch.converged[0]:
        message = f"Series for local solution at z={z} did not converge in {int(batch.terms_used[0])} terms"
        if strict:
            partial = SeriesResult(value=psi, derivative=dpsi, second_derivative=float("nan"),
                                   terms_used=int(batch.terms_used[0]), tail_estimate=float("nan"),
                                   converged=False)
            raise NotConvergedError(message, partial=partial)
        logger.warning(message)
    return psi, dpsi


def eval_psi_batch(p: WellParameters, energies: ArrayLike, z: ArrayLike, b: BranchSpec,
                   ctl: Optional[SeriesControl] = None, margin: float = OVERLAP_MARGIN,
                   allow_zero: bool = False) -> PsiBatch:
    """
    Evaluate one branch for a broadcast batch of energies and coordinates.

    Results are unscaled. Non-convergence is reported per element in
    `converged`, never raised.

    Args:
        p: Well parameters
        energies: Energies (E > 0, or E >= 0 with allow_zero)
        z: Coordinates
        b: Branch selection
        ctl: Series truncation controls
        margin: Distance kept from the far singular point
        allow_zero: Accept E = 0 (the q = 0 threshold solution)

    Returns:
        PsiBatch: Arrays shaped like broadcast(energies, z)
    """
    e = np.atleast_1d(np.asarray(energies, dtype=float))
    if np.any(e < 0) or (not allow_zero and np.any(e == 0)):
        raise DomainError("Local solutions need E > 0")
    q = b.r_sign * 0.5 * np.sqrt(e)
    s = b.s_value(p.w1)
    q_b, z_b = np.broadcast_arrays(q, np.atleast_1d(np.asarray(z, dtype=float)))
    params = _branch_table(p, q_b, b.r_sign * q_b, s, b.at_one)
    if np.any(params[1] <= -1.0):
        raise DomainError("beta <= -1 on this branch: no plain series solution")
    return _evaluate(q_b, b.r_sign * q_b, s, params, b.at_one, z_b, ctl, margin)
