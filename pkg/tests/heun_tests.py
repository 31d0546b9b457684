#!/usr/bin/env python3
"""
Tests for the confluent Heun series engine.
Extended-precision sums from mpmath serve as the independent oracle.
"""

import math

import mpmath
import numpy as np
import pytest

from heunwell import DomainError, HeunParameters, SeriesControl, eval_heun
from heunwell.series_core.heun import heun_coefficients, recurrence_coeffs, sum_series, termination_residual


def mp_heun(hp: HeunParameters, xi: float, max_terms: int = 20000, tol: str = "5e-15"):
    """H and dH/dxi summed at 40 digits straight from the recurrence."""
    with mpmath.workdps(40):
        a, b, g, d, e = (mpmath.mpf(v) for v in hp.as_tuple())
        x = mpmath.mpf(xi)
        tol = mpmath.mpf(tol)
        c_prev2, c_prev = mpmath.mpf(0), mpmath.mpf(1)
        value, deriv = mpmath.mpf(1), mpmath.mpf(0)
        small = 0
        for n in range(1, max_terms):
            A = 1 + b / n
            B = 1 + (b + g - a - 1) / n + (e - (b + g - a) / 2 - b * (a - g) / 2) / n ** 2
            C = (d + a * ((b + g) / 2 + n - 1)) / n ** 2
            c = (B * c_prev + C * c_prev2) / A
            term = c * x ** n
            dterm = n * c * x ** (n - 1)
            value += term
            deriv += dterm
            if abs(term) < tol * max(1, abs(value)) and abs(dterm) < tol * max(1, abs(deriv)):
                small += 1
                if small >= 8:
                    break
            else:
                small = 0
            c_prev2, c_prev = c_prev, c
        return float(value), float(deriv)


def asymmetric_branch(E: float) -> HeunParameters:
    """Expansion-about-0 parameters of the (15, 12, 1) well with s = -2 sqrt(15)."""
    s = -2.0 * math.sqrt(15.0)
    q = 0.5 * math.sqrt(E)
    return HeunParameters(alpha=2 * s, beta=2 * q, gamma=2 * q, delta=-2.0,
                          eta=-30.0 + 12.0 + 1.0 + 2 * q * q)


def random_parameters(rng: np.random.Generator, count: int):
    for _ in range(count):
        yield HeunParameters(
            alpha=float(rng.uniform(-6, 6)),
            beta=float(rng.uniform(-0.5, 3)),
            gamma=float(rng.uniform(-0.5, 3)),
            delta=float(rng.uniform(-5, 5)),
            eta=float(rng.uniform(-10, 10)),
        )


def test_recurrence_coefficient_examples():
    print("Testing recurrence coefficients...")

    zero = HeunParameters(alpha=0, beta=0, gamma=0, delta=0, eta=0)
    assert recurrence_coeffs(zero, 1) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)

    a2, _, _ = recurrence_coeffs(HeunParameters(alpha=0, beta=1, gamma=0, delta=0, eta=0), 2)
    assert a2 == pytest.approx(1.5)

    _, _, c3 = recurrence_coeffs(HeunParameters(alpha=0, beta=0, gamma=0, delta=2, eta=0), 3)
    assert c3 == pytest.approx(2.0 / 9.0)

    with pytest.raises(DomainError):
        recurrence_coeffs(zero, 0)

    print("✅ Recurrence coefficients test passed!\n")


def test_series_at_origin():
    print("Testing the series at xi = 0...")

    rng = np.random.default_rng(7)
    for hp in random_parameters(rng, 5):
        a1, b1, _ = recurrence_coeffs(hp, 1)
        result = eval_heun(hp, 0.0)
        assert result.value == 1.0
        assert result.derivative == pytest.approx(b1 / a1, rel=1e-14)
        assert result.converged

    zero = HeunParameters(alpha=0, beta=0, gamma=0, delta=0, eta=0)
    result = eval_heun(zero, 0.7)
    assert result.value == 1.0
    assert result.derivative == 0.0

    print("✅ Series at origin test passed!\n")


def test_against_extended_precision():
    """Asymmetric-well branch at E = 2.434 and xi(0.2), plus random parameter sets."""
    print("Testing against the mpmath oracle...")

    hp = asymmetric_branch(2.434)
    xi = 0.59868
    result = eval_heun(hp, xi)
    ref_value, ref_deriv = mp_heun(hp, xi)
    print(f"H = {result.value:.15g} (oracle {ref_value:.15g}) in {result.terms_used} terms")
    assert result.converged
    assert math.isfinite(result.value)
    assert result.value == pytest.approx(ref_value, rel=1e-10, abs=1e-12)
    assert result.derivative == pytest.approx(ref_deriv, rel=1e-10, abs=1e-12)

    rng = np.random.default_rng(11)
    for hp in random_parameters(rng, 8):
        for x in (0.1, 0.5, 0.8):
            result = eval_heun(hp, x)
            ref_value, ref_deriv = mp_heun(hp, x)
            assert result.value == pytest.approx(ref_value, rel=1e-9, abs=1e-11)
            assert result.derivative == pytest.approx(ref_deriv, rel=1e-9, abs=1e-11)

    print("✅ Extended precision test passed!\n")


def test_ode_residual():
    """H'' + [alpha + (1+beta)/xi + (1+gamma)/(xi-1)] H' + (mu xi + nu)/(xi(xi-1)) H = 0."""
    print("Testing the confluent Heun equation residual...")

    rng = np.random.default_rng(3)
    for hp in random_parameters(rng, 10):
        for xi in (0.1, 0.3, 0.5, 0.7):
            r = eval_heun(hp, xi)
            a, b, g, _, _ = hp.as_tuple()
            parts = (
                r.second_derivative,
                (a + (1 + b) / xi + (1 + g) / (xi - 1)) * r.derivative,
                (hp.mu * xi + hp.nu) / (xi * (xi - 1)) * r.value,
            )
            residual = sum(parts)
            scale = max(abs(v) for v in parts)
            assert abs(residual) <= 1e-8 * max(scale, 1.0), f"residual {residual} at xi={xi} for {hp}"

    print("✅ ODE residual test passed!\n")


def test_derivative_matches_finite_difference():
    print("Testing dH/dxi against finite differences...")

    rng = np.random.default_rng(5)
    step = 1e-6
    for hp in random_parameters(rng, 5):
        for xi in np.linspace(0.1, 0.9, 5):
            r = eval_heun(hp, float(xi))
            fd = (eval_heun(hp, float(xi) + step).value - eval_heun(hp, float(xi) - step).value) / (2 * step)
            assert fd == pytest.approx(r.derivative, rel=1e-6, abs=1e-7 * max(1.0, abs(r.value)))

    print("✅ Finite difference derivative test passed!\n")


def test_parameter_continuity():
    """Nudging any parameter by 1e-9 moves H by at most 1e-6 relative."""
    print("Testing continuity in the parameters...")

    rng = np.random.default_rng(11)
    wells = [asymmetric_branch(0.311), asymmetric_branch(3.875)] + list(random_parameters(rng, 4))
    for hp in wells:
        for xi in (0.1, 0.5, 0.8):
            value = eval_heun(hp, xi).value
            for name, v in hp.model_dump().items():
                nudged = hp.model_copy(update={name: v + 1e-9})
                moved = eval_heun(nudged, xi).value
                assert abs(moved - value) <= 1e-6 * max(1.0, abs(value)), f"{name} of {hp} at xi={xi}"

    print("✅ Parameter continuity test passed!\n")


def test_recurrence_consistency():
    """A_n c_n - B_n c_{n-1} - C_n c_{n-2} vanishes at random n."""
    print("Testing recurrence consistency...")

    hp = asymmetric_branch(0.311)
    coeffs = heun_coefficients(hp, 200)
    rng = np.random.default_rng(1)
    for n in rng.integers(2, 200, size=10):
        n = int(n)
        a_n, b_n, c_n = recurrence_coeffs(hp, n)
        parts = (a_n * coeffs[n], b_n * coeffs[n - 1], c_n * coeffs[n - 2])
        assert abs(parts[0] - parts[1] - parts[2]) <= 16 * np.finfo(float).eps * max(abs(v) for v in parts)

    print("✅ Recurrence consistency test passed!\n")


def test_termination_residual():
    print("Testing termination residual...")

    zero = HeunParameters(alpha=0, beta=0, gamma=0, delta=0, eta=0)
    assert termination_residual(zero, 0) == 0.0

    generic = termination_residual(asymmetric_branch(0.311), 3)
    print(f"c_4 for a generic branch: {generic:.4g}")
    assert abs(generic) > 1e-6

    with pytest.raises(DomainError):
        termination_residual(zero, -1)

    print("✅ Termination residual test passed!\n")


def test_batch_matches_scalar():
    print("Testing batched summation...")

    hp = asymmetric_branch(1.0)
    xs = np.array([0.05, 0.3, 0.6, 0.85])
    batch = sum_series(*hp.as_tuple(), xs)
    for i, x in enumerate(xs):
        single = eval_heun(hp, float(x))
        assert batch.result(i).value == pytest.approx(single.value, rel=1e-13)
        assert batch.converged[i]

    print("✅ Batched summation test passed!\n")


def test_non_convergence_and_domain():
    print("Testing non-convergence and domain errors...")

    hp = asymmetric_branch(1.0)
    result = eval_heun(hp, 0.95, SeriesControl(max_terms=10, tail_window=4))
    assert not result.converged
    assert result.terms_used == 10
    assert result.tail_estimate > 0

    with pytest.raises(DomainError):
        eval_heun(hp, 1.0)
    with pytest.raises(DomainError):
        eval_heun(HeunParameters(alpha=0, beta=-1.5, gamma=0, delta=0, eta=0), 0.5)
    with pytest.raises(ValueError):
        SeriesControl(tail_window=1)

    print("✅ Non-convergence test passed!\n")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
