"""
Confluent Heun function H(alpha, beta, gamma, delta, eta; u) as a power series.

H = sum_n c_n u^n with c_{-1} = 0, c_0 = 1 and the three-term recurrence
    A_n c_n = B_n c_{n-1} + C_n c_{n-2},
    A_n = 1 + beta/n,
    B_n = 1 + (beta + gamma - alpha - 1)/n
            + [eta - (beta + gamma - alpha)/2 - beta (alpha - gamma)/2]/n^2,
    C_n = [delta + alpha ((beta + gamma)/2 + n - 1)]/n^2.
The series converges for |u| < 1. The engine is vectorized: every argument
may be an array, and all of them broadcast together.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, model_validator

from ..errors import DomainError

logger = logging.getLogger(__name__)


class HeunParameters(BaseModel):
    """The five confluent Heun parameters; mu and nu are always derived."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    alpha: float
    beta: float
    gamma: float
    delta: float
    eta: float

    @property
    def mu(self) -> float:
        return self.delta + self.alpha * (self.beta + self.gamma + 2.0) / 2.0

    @property
    def nu(self) -> float:
        return self.eta + self.beta / 2.0 + (self.gamma - self.alpha) * (self.beta + 1.0) / 2.0

    def as_tuple(self) -> Tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.eta)


class SeriesControl(BaseModel):
    """Truncation controls for series summation."""

    model_config = ConfigDict(frozen=True)

    max_terms: int = 5000
    tail_tol: float = 1e-14
    tail_window: int = 4

    @model_validator(mode="after")
    def _check_limits(self) -> "SeriesControl":
        if self.tail_window < 2:
            raise ValueError(f"tail_window must be at least 2, got {self.tail_window}")
        if self.max_terms < self.tail_window:
            raise ValueError(f"max_terms ({self.max_terms}) must be >= tail_window ({self.tail_window})")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol}")
        return self


class SeriesResult(BaseModel):
    """One summed series: H, dH/du, d2H/du2 and how the sum was truncated."""

    model_config = ConfigDict(frozen=True)

    value: float
    derivative: float
    second_derivative: float
    terms_used: int
    tail_estimate: float
    converged: bool


@dataclass
class SeriesBatch:
    """Array-valued counterpart of SeriesResult, one entry per broadcast element."""

    value: NDArray[np.float64]
    derivative: NDArray[np.float64]
    second_derivative: NDArray[np.float64]
    terms_used: NDArray[np.int64]
    tail_estimate: NDArray[np.float64]
    converged: NDArray[np.bool_]

    def result(self, index: int = 0) -> SeriesResult:
        return SeriesResult(
            value=float(self.value[index]),
            derivative=float(self.derivative[index]),
            second_derivative=float(self.second_derivative[index]),
            terms_used=int(self.terms_used[index]),
            tail_estimate=float(self.tail_estimate[index]),
            converged=bool(self.converged[index]),
        )


class _Recurrence:
    """Precomputed pieces of A_n, B_n, C_n for a (possibly batched) parameter set."""

    def __init__(self, alpha: ArrayLike, beta: ArrayLike, gamma: ArrayLike,
                 delta: ArrayLike, eta: ArrayLike):
        alpha, beta, gamma, delta, eta = (np.asarray(a, dtype=float) for a in (alpha, beta, gamma, delta, eta))
        bga = beta + gamma - alpha
        self.alpha = alpha
        self.beta = beta
        self.b_lin = bga - 1.0
        self.b_quad = eta - 0.5 * bga - 0.5 * beta * (alpha - gamma)
        # C_n n^2 = delta + alpha((beta+gamma)/2 - 1) + alpha n; no division by alpha
        self.c_const = delta + alpha * (0.5 * (beta + gamma) - 1.0)

    def coeffs(self, n: int) -> Tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        inv_n = 1.0 / n
        a_n = 1.0 + self.beta * inv_n
        b_n = 1.0 + self.b_lin * inv_n + self.b_quad * inv_n * inv_n
        c_n = (self.c_const + self.alpha * n) * inv_n * inv_n
        return a_n, b_n, c_n


class _Compensated:
    """Vectorized Neumaier summation."""

    def __init__(self, start: NDArray[np.float64]):
        self.total = start.astype(float, copy=True)
        self.comp = np.zeros_like(self.total)

    def add(self, x: NDArray[np.float64]) -> None:
        t = self.total + x
        big = np.abs(self.total) >= np.abs(x)
        self.comp += np.where(big, (self.total - t) + x, (x - t) + self.total)
        self.total = t

    @property
    def value(self) -> NDArray[np.float64]:
        return self.total + self.comp


def recurrence_coeffs(hp: HeunParameters, n: int) -> Tuple[float, float, float]:
    """
    Recurrence coefficients (A_n, B_n, C_n) for n >= 1.

    C_n uses the expanded form [delta + alpha((beta+gamma)/2 + n - 1)]/n^2,
    so alpha = 0 is an ordinary input.
    """
    if n < 1:
        raise DomainError(f"Recurrence index must be >= 1, got n={n}")
    a_n, b_n, c_n = _Recurrence(*hp.as_tuple()).coeffs(n)
    return float(a_n), float(b_n), float(c_n)


def heun_coefficients(hp: HeunParameters, count: int) -> NDArray[np.float64]:
    """
    Return the first `count` series coefficients c_0 ... c_{count-1}.

    Args:
        hp: Heun parameters (beta > -1)
        count: Number of coefficients, at least 1

    Returns:
        NDArray: Unnormalized coefficients with c_0 = 1
    """
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    if hp.beta <= -1:
        raise DomainError(f"beta must exceed -1 for this series branch, got beta={hp.beta}")
    rec = _Recurrence(*hp.as_tuple())
    coeffs = np.zeros(count)
    coeffs[0] = 1.0
    c_prev2, c_prev = 0.0, 1.0
    for n in range(1, count):
        a_n, b_n, c_n = rec.coeffs(n)
        c_next = float((b_n * c_prev + c_n * c_prev2) / a_n)
        coeffs[n] = c_next
        c_prev2, c_prev = c_prev, c_next
    return coeffs


def sum_series(alpha: ArrayLike, beta: ArrayLike, gamma: ArrayLike, delta: ArrayLike,
               eta: ArrayLike, u: ArrayLike, ctl: Optional[SeriesControl] = None) -> SeriesBatch:
    """
    Sum the confluent Heun series for a broadcast batch of parameters and arguments.

    A column is converged once tail_window consecutive terms of both the value
    and the derivative series fall below tail_tol * max(1, |partial sum|).
    Summation is compensated. Columns keep accumulating after they converge,
    until every column has converged or max_terms is reached.

    Args:
        alpha, beta, gamma, delta, eta: Heun parameters (scalars or arrays)
        u: Expansion variable, |u| < 1
        ctl: Truncation controls

    Returns:
        SeriesBatch: One entry per broadcast element (flattened to 1-D)
    """
    ctl = ctl or SeriesControl()
    arrays = np.broadcast_arrays(*(np.atleast_1d(np.asarray(a, dtype=float))
                                   for a in (alpha, beta, gamma, delta, eta, u)))
    alpha, beta, gamma, delta, eta, u = (a.ravel() for a in arrays)
    if np.any(np.abs(u) >= 1.0):
        raise DomainError("Series argument must satisfy |u| < 1")
    if np.any(beta <= -1.0):
        raise DomainError("beta must exceed -1 for this series branch")

    size = u.shape[0]
    rec = _Recurrence(alpha, beta, gamma, delta, eta)
    tol = ctl.tail_tol
    window = ctl.tail_window

    value = _Compensated(np.ones(size))
    deriv = _Compensated(np.zeros(size))
    second = _Compensated(np.zeros(size))

    c_prev2 = np.zeros(size)
    c_prev = np.ones(size)
    pw_nm1 = np.ones(size)   # u^(n-1)
    pw_nm2 = np.ones(size)   # u^(n-2), only multiplied by n(n-1)

    streak = np.zeros(size, dtype=np.int64)
    recent = np.zeros((window, size))
    converged = np.zeros(size, dtype=bool)
    diverged = np.zeros(size, dtype=bool)
    terms_used = np.full(size, ctl.max_terms, dtype=np.int64)
    tail = np.full(size, np.inf)

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, ctl.max_terms):
            a_n, b_n, cc_n = rec.coeffs(n)
            c_n = (b_n * c_prev + cc_n * c_prev2) / a_n
            bad = ~np.isfinite(c_n)
            if np.any(bad):
                diverged |= bad
                c_n = np.where(bad, 0.0, c_n)

            term = c_n * pw_nm1 * u
            dterm = n * c_n * pw_nm1
            d2term = n * (n - 1) * c_n * pw_nm2
            value.add(term)
            deriv.add(dterm)
            second.add(d2term)

            small = ((np.abs(term) <= tol * np.maximum(1.0, np.abs(value.total)))
                     & (np.abs(dterm) <= tol * np.maximum(1.0, np.abs(deriv.total))))
            streak = np.where(small, streak + 1, 0)
            recent[n % window] = np.maximum(np.abs(term), np.abs(dterm))

            newly = (streak >= window) & ~converged & ~diverged
            if np.any(newly):
                terms_used[newly] = n + 1
                tail[newly] = recent.max(axis=0)[newly]
                converged |= newly
            if np.all(converged | diverged):
                break

            c_prev2, c_prev = c_prev, c_n
            pw_nm2, pw_nm1 = pw_nm1, pw_nm1 * u

    pending = ~converged
    if np.any(pending):
        tail[pending] = recent.max(axis=0)[pending]
        terms_used[pending] = n + 1
        logger.debug(f"{int(pending.sum())} of {size} series did not converge within {ctl.max_terms} terms")

    result_value = value.value
    result_deriv = deriv.value
    result_second = second.value
    if np.any(diverged):
        result_value[diverged] = np.nan
        result_deriv[diverged] = np.nan
        result_second[diverged] = np.nan
        tail[diverged] = np.inf

    return SeriesBatch(
        value=result_value,
        derivative=result_deriv,
        second_derivative=result_second,
        terms_used=terms_used,
        tail_estimate=tail,
        converged=converged,
    )


def eval_heun(hp: HeunParameters, xi: float, ctl: Optional[SeriesControl] = None) -> SeriesResult:
    """
    Evaluate H(alpha, beta, gamma, delta, eta; xi) and its first two xi-derivatives.

    Args:
        hp: Heun parameters (beta > -1)
        xi: Argument with |xi| < 1
        ctl: Truncation controls

    Returns:
        SeriesResult: converged=False (with a warning) when max_terms was reached

    Raises:
        DomainError: If |xi| >= 1 or beta <= -1
    """
    if abs(xi) >= 1.0:
        raise DomainError(f"eval_heun requires |xi| < 1, got xi={xi}")
    if hp.beta <= -1.0:
        raise DomainError(f"beta must exceed -1 for this series branch, got beta={hp.beta}")
    result = sum_series(*hp.as_tuple(), xi, ctl).result(0)
    if not result.converged:
        logger.warning(f"Heun series at xi={xi} not converged after {result.terms_used} terms "
                       f"(tail {result.tail_estimate:.3e})")
    return result


def termination_residual(hp: HeunParameters, N: int, ctl: Optional[SeriesControl] = None) -> float:
    """
    Return c_{N+1}, unnormalized. Together with delta = -alpha(N + 1 + (beta+gamma)/2)
    a vanishing residual means H is a polynomial of degree N.
    """
    if N < 0:
        raise DomainError(f"Polynomial order must be non-negative, got N={N}")
    return float(heun_coefficients(hp, N + 2)[N + 1])
