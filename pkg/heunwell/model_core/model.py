"""
Domain types and the hyperbolic asymmetric double-well potential.

Everything downstream of this module works in the dimensionless form:
    z = x/L,  w_i = L^2 V_i,  E = -L^2 epsilon,
    U(z) = {-w1 [1 + tanh^2 z] + [w2 - w3 tanh z]} sech^2 z.
Dimensional inputs (V_i, L) are converted once, at construction.
"""

import math
import logging
from typing import Any, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from scipy.special import expit

from ..errors import DomainError, domain_error_cause

logger = logging.getLogger(__name__)

DEFAULT_Z_CAP = 25.0
CEILING_GRID_POINTS = 20001
CEILING_MARGIN = 0.05

FloatOrArray = Union[float, NDArray[np.float64]]


class WellParameters(BaseModel):
    """Dimensionless potential strengths, optionally carrying their dimensional source."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    w1: float
    w2: float
    w3: float
    V1: Optional[float] = None
    V2: Optional[float] = None
    V3: Optional[float] = None
    L: Optional[float] = None

    def __init__(self, **data: Any) -> None:
        try:
            super().__init__(**data)
        except ValidationError as e:
            cause = domain_error_cause(e)
            if cause is None:
                raise
            raise cause from e

    @model_validator(mode="after")
    def _check_consistency(self) -> "WellParameters":
        if self.w1 < 0:
            raise DomainError(
                f"w1 must be non-negative (s = ±2√w1 must be real), got w1={self.w1}"
            )
        sources = (self.V1, self.V2, self.V3, self.L)
        if any(v is not None for v in sources):
            if any(v is None for v in sources):
                raise ValueError("Dimensional source needs all of V1, V2, V3 and L")
            if self.L <= 0:
                raise DomainError(f"Well width L must be positive, got L={self.L}")
            L2 = self.L * self.L
            for name, w, v in (("w1", self.w1, self.V1), ("w2", self.w2, self.V2), ("w3", self.w3, self.V3)):
                expected = L2 * v
                if abs(w - expected) > 4 * np.finfo(float).eps * max(1.0, abs(expected)):
                    raise ValueError(f"{name}={w} does not equal L^2*V ({expected})")
        return self

    @classmethod
    def from_dimensional(cls, V1: float, V2: float, V3: float, L: float) -> "WellParameters":
        """
        Build parameters from strengths in units of 2m/hbar^2 and the width L.

        Args:
            V1, V2, V3: Potential strengths
            L: Well width, must be positive

        Returns:
            WellParameters: With w_i = L^2 V_i and the source fields kept
        """
        if L is None or L <= 0:
            raise DomainError(f"Well width L must be positive, got L={L}")
        L2 = L * L
        return cls(w1=L2 * V1, w2=L2 * V2, w3=L2 * V3, V1=V1, V2=V2, V3=V3, L=L)

    @property
    def is_dimensional(self) -> bool:
        return self.L is not None

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.w1, self.w2, self.w3)

    def mirrored(self) -> "WellParameters":
        """The z -> -z mirror image (w3 -> -w3), which has the same spectrum."""
        return WellParameters(w1=self.w1, w2=self.w2, w3=-self.w3)


class Energy(BaseModel):
    """A dimensionless energy E = -L^2 epsilon; bound states have E > 0."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    E: float
    L: Optional[float] = None

    @property
    def is_bound(self) -> bool:
        return self.E > 0

    @property
    def epsilon(self) -> Optional[float]:
        """Energy in units of 2m/hbar^2, available when L is known."""
        if self.L is None:
            return None
        return -self.E / (self.L * self.L)


EnergyLike = Union[float, Energy]


def energy_value(E: EnergyLike) -> float:
    return E.E if isinstance(E, Energy) else float(E)


class Coordinate(BaseModel):
    """A point z with xi = (1 + tanh z)/2 and xi' = 1 - xi, both computed without cancellation."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    z: float

    @property
    def xi(self) -> float:
        return float(expit(2.0 * self.z))

    @property
    def xi_prime(self) -> float:
        return float(expit(-2.0 * self.z))

    @property
    def dxi_dz(self) -> float:
        return 2.0 * self.xi * self.xi_prime

    @classmethod
    def from_xi(cls, xi: float, xi_prime: Optional[float] = None) -> "Coordinate":
        return cls(z=float(z_of_xi(xi, xi_prime)))


def _unwrap(value: NDArray[np.float64]) -> FloatOrArray:
    return float(value) if np.ndim(value) == 0 else value


def xi_pair(z: ArrayLike) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (xi, 1 - xi) at z, each evaluated directly so neither loses precision."""
    z_arr = np.asarray(z, dtype=float)
    return expit(2.0 * z_arr), expit(-2.0 * z_arr)


def xi_of_z(z: ArrayLike) -> FloatOrArray:
    """
    Map z to xi = (1 + tanh z)/2 in (0, 1).

    Args:
        z: Finite coordinate (scalar or array)

    Returns:
        xi, strictly increasing in z
    """
    xi, _ = xi_pair(z)
    return _unwrap(xi)


def z_of_xi(xi: ArrayLike, xi_prime: Optional[ArrayLike] = None) -> FloatOrArray:
    """
    Invert xi_of_z. Pass xi_prime = 1 - xi when it is known more precisely than 1 - xi.
    """
    xi_arr = np.asarray(xi, dtype=float)
    xip_arr = 1.0 - xi_arr if xi_prime is None else np.asarray(xi_prime, dtype=float)
    if np.any(xi_arr <= 0) or np.any(xip_arr <= 0):
        raise DomainError("xi must lie strictly inside (0, 1)")
    return _unwrap(0.5 * np.log(xi_arr / xip_arr))


def potential_u(z: ArrayLike, p: WellParameters) -> FloatOrArray:
    """
    Evaluate U(z) = L^2 V(x) at z (scalar or array).

    tanh z and sech^2 z are formed from the xi pair: tanh z = xi - xi',
    sech^2 z = 4 xi xi', so the exponential decay survives for large |z|.
    """
    xi, xip = xi_pair(z)
    t = xi - xip
    sech2 = 4.0 * xi * xip
    u = (-p.w1 * (1.0 + t * t) + p.w2 - p.w3 * t) * sech2
    return _unwrap(u)


def energy_search_ceiling(p: WellParameters,
                          z_cap: float = DEFAULT_Z_CAP,
                          points: int = CEILING_GRID_POINTS,
                          margin: float = CEILING_MARGIN) -> float:
    """
    Upper bound on bound-state energies: E <= -min_z U, widened by margin.

    Args:
        p: Well parameters
        z_cap: Half-width of the sampling window
        points: Number of samples
        margin: Relative safety margin (default 5%)

    Returns:
        float: 0.0 if U >= 0 on every sample (no bound states possible)
    """
    z = np.linspace(-z_cap, z_cap, points)
    u_min = float(np.min(potential_u(z, p)))
    if u_min >= 0:
        logger.debug(f"U >= 0 everywhere for {p.as_tuple()}, ceiling is 0")
        return 0.0
    ceiling = (1.0 + margin) * (-u_min)
    logger.debug(f"Energy ceiling for {p.as_tuple()}: min U={u_min:.6g}, ceiling={ceiling:.6g}")
    return ceiling


def poschl_teller_energies(w2: float) -> list[float]:
    """Closed-form levels of U = w2 sech^2 z: E_n = (lam - n)^2 with lam = (-1 + sqrt(1 - 4 w2))/2."""
    if w2 >= 0:
        return []
    lam = (-1.0 + math.sqrt(1.0 - 4.0 * w2)) / 2.0
    return sorted((lam - n) ** 2 for n in range(int(math.ceil(lam))) if lam - n > 0)
