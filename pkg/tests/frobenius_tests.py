#!/usr/bin/env python3
"""
Tests for the four local solutions about xi = 0 and xi = 1.
"""

import math

import mpmath
import numpy as np
import pytest

from heunwell import (
    BranchSpec,
    DomainError,
    NotConvergedError,
    SSign,
    SeriesControl,
    WellParameters,
    build_local_solution,
    eval_psi,
    potential_u,
)
from heunwell.series_core.frobenius import eval_psi_batch, zero_energy_solution

ASYMMETRIC_WELL = WellParameters(w1=15, w2=12, w3=1)


def second_derivative(sol, z: float, h: float = 1e-5) -> float:
    return (eval_psi(sol, z + h)[1] - eval_psi(sol, z - h)[1]) / (2 * h)


def test_branch_tables():
    print("Testing branch parameter tables...")

    sol = build_local_solution(ASYMMETRIC_WELL, 4.0, BranchSpec.psi(1))
    assert sol.q == pytest.approx(1.0)
    assert sol.r == pytest.approx(1.0)
    assert sol.hp.beta == pytest.approx(2.0)
    assert sol.hp.gamma == pytest.approx(2.0)
    assert sol.hp.delta == pytest.approx(-2.0)
    assert sol.s == pytest.approx(-2.0 * math.sqrt(15.0))
    assert sol.hp.alpha == pytest.approx(2.0 * sol.s)

    E = 2.434
    q = 0.5 * math.sqrt(E)
    at_one = build_local_solution(ASYMMETRIC_WELL, E, BranchSpec.psi(3))
    assert at_one.hp.eta == pytest.approx(-30.0 + 12.0 - 1.0 + 2.0 * q * q, rel=1e-14)
    assert at_one.hp.eta == pytest.approx(-19.0 + E / 2.0, rel=1e-14)
    assert at_one.hp.alpha == pytest.approx(-2.0 * at_one.s)
    assert at_one.hp.delta == pytest.approx(2.0)

    plus = build_local_solution(ASYMMETRIC_WELL, E, BranchSpec.psi(1, SSign.PLUS))
    assert plus.s == pytest.approx(2.0 * math.sqrt(15.0))

    print("✅ Branch tables test passed!\n")


def test_second_solution_at_zero():
    """Psi_2 has beta = -sqrt(E), so it needs E < 1 to exist as a plain series."""
    print("Testing the r = -q branch about xi = 0...")

    low = build_local_solution(ASYMMETRIC_WELL, 0.311, BranchSpec.psi(2))
    assert low.q == pytest.approx(-0.5 * math.sqrt(0.311))
    assert not low.requires_polynomial
    psi, _ = eval_psi(low, -3.0)
    assert math.isfinite(psi)

    high = build_local_solution(ASYMMETRIC_WELL, 2.434, BranchSpec.psi(2))
    assert high.requires_polynomial
    with pytest.raises(DomainError):
        eval_psi(high, -1.0)

    print("✅ Second solution test passed!\n")


def test_decay_at_the_far_left():
    print("Testing Psi_1 as z -> -infinity...")

    sol = build_local_solution(ASYMMETRIC_WELL, 1.0, BranchSpec.psi(1))
    psi, dpsi = eval_psi(sol, -30.0)
    print(f"Psi_1(-30) = {psi:.3e}")
    assert abs(psi) < 1e-12
    assert abs(dpsi) < 1e-12

    right = build_local_solution(ASYMMETRIC_WELL, 1.0, BranchSpec.psi(3))
    assert abs(eval_psi(right, 30.0)[0]) < 1e-12

    print("✅ Far-left decay test passed!\n")


def test_match_point_values():
    print("Testing both solutions at the match point...")

    for index in (1, 3):
        sol = build_local_solution(ASYMMETRIC_WELL, 0.311, BranchSpec.psi(index))
        psi, dpsi = eval_psi(sol, 0.2)
        print(f"Psi_{index}(0.2) = {psi:.6g}, dPsi/dz = {dpsi:.6g}")
        assert math.isfinite(psi) and psi != 0.0
        assert math.isfinite(dpsi)

    print("✅ Match point test passed!\n")


def mp_psi(sol, z, terms: int = 400):
    """Unscaled Psi at the working mpmath precision, from a fixed-length sum of the recurrence."""
    a, b, g, d, e = (mpmath.mpf(v) for v in sol.hp.as_tuple())
    xi = (1 + mpmath.tanh(z)) / 2
    u = 1 - xi if sol.branch.at_one else xi
    c_prev2, c_prev, total = mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(1)
    for n in range(1, terms):
        A = 1 + b / n
        B = 1 + (b + g - a - 1) / n + (e - (b + g - a) / 2 - b * (a - g) / 2) / n ** 2
        C = (d + a * ((b + g) / 2 + n - 1)) / n ** 2
        c = (B * c_prev + C * c_prev2) / A
        total += c * u ** n
        c_prev2, c_prev = c_prev, c
    return xi ** sol.q * (1 - xi) ** sol.r * mpmath.exp(sol.s * xi) * total


def test_derivative_matches_finite_difference():
    """The s < 0 branches keep full precision, so a central difference resolves dPsi/dz."""
    print("Testing dPsi/dz against finite differences...")

    h = 1e-6
    for index in (1, 3):
        sol = build_local_solution(ASYMMETRIC_WELL, 1.0, BranchSpec.psi(index, SSign.MINUS))
        _, dpsi = eval_psi(sol, 0.2)
        fd = (eval_psi(sol, 0.2 + h)[0] - eval_psi(sol, 0.2 - h)[0]) / (2 * h)
        assert fd == pytest.approx(dpsi, rel=1e-6)

    print("✅ Finite difference test passed!\n")


def test_derivative_matches_extended_precision():
    """Both signs of s against Psi and dPsi/dz computed at 40 digits."""
    print("Testing Psi and dPsi/dz against mpmath...")

    for index in (1, 3):
        for sign in (SSign.MINUS, SSign.PLUS):
            sol = build_local_solution(ASYMMETRIC_WELL, 1.0, BranchSpec.psi(index, sign))
            psi, dpsi = eval_psi(sol, 0.2)
            with mpmath.workdps(40):
                z = mpmath.mpf(0.2)
                ref_psi = float(mp_psi(sol, z))
                ref_dpsi = float(mpmath.diff(lambda t: mp_psi(sol, t), z))
            print(f"Psi_{index} s {sign.value}: dPsi/dz = {dpsi:.12g}, reference {ref_dpsi:.12g}")
            assert psi == pytest.approx(ref_psi, rel=1e-8)
            assert dpsi == pytest.approx(ref_dpsi, rel=1e-8)

    print("✅ Extended precision derivative test passed!\n")


def test_schrodinger_residual():
    """-Psi'' + U Psi = -E Psi at interior points of each expansion's region."""
    print("Testing the z-space equation residual...")

    E = 1.7
    checks = [(1, [-2.0, -1.0, -0.5, 0.0, 0.3]), (3, [-0.3, 0.0, 0.5, 1.0, 2.0])]
    for index, points in checks:
        sol = build_local_solution(ASYMMETRIC_WELL, E, BranchSpec.psi(index))
        for z in points:
            psi, _ = eval_psi(sol, z)
            d2 = second_derivative(sol, z)
            u = potential_u(z, ASYMMETRIC_WELL)
            residual = -d2 + u * psi + E * psi
            assert abs(residual) <= 1e-7, f"Psi_{index} residual {residual:.3e} at z={z}"

    print("✅ Schrodinger residual test passed!\n")


def test_fourth_solution_is_proportional_to_third():
    """Both behave as (1 - xi)^{sqrt(E)/2} near xi = 1, so their ratio is constant."""
    print("Testing Psi_4 / Psi_3...")

    E = 2.434
    psi3 = build_local_solution(ASYMMETRIC_WELL, E, BranchSpec.psi(3))
    psi4 = build_local_solution(ASYMMETRIC_WELL, E, BranchSpec.psi(4))
    ratios = [eval_psi(psi4, z)[0] / eval_psi(psi3, z)[0] for z in (0.2, 1.0, 2.0, 3.0)]
    print(f"Ratios: {ratios}")
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-8)

    print("✅ Proportionality test passed!\n")


def test_scale_and_batch():
    print("Testing scaled and batched evaluation...")

    sol = build_local_solution(ASYMMETRIC_WELL, 0.8, BranchSpec.psi(1))
    psi, dpsi = eval_psi(sol, 0.1)
    scaled = eval_psi(sol.with_scale(-2.5), 0.1)
    assert scaled == pytest.approx((-2.5 * psi, -2.5 * dpsi), rel=1e-15)

    energies = np.array([0.3, 0.8, 2.0])
    batch = eval_psi_batch(ASYMMETRIC_WELL, energies, 0.1, BranchSpec.psi(1))
    for i, e in enumerate(energies):
        single = eval_psi(build_local_solution(ASYMMETRIC_WELL, float(e), BranchSpec.psi(1)), 0.1)
        assert batch.psi[i] == pytest.approx(single[0], rel=1e-12)
        assert batch.dpsi_dz[i] == pytest.approx(single[1], rel=1e-12)
    assert batch.converged.all()

    zero = zero_energy_solution(ASYMMETRIC_WELL, BranchSpec.psi(1))
    assert zero.q == 0.0 and zero.hp.beta == 0.0

    print("✅ Scale and batch test passed!\n")


def test_errors():
    print("Testing local solution errors...")

    with pytest.raises(DomainError):
        build_local_solution(ASYMMETRIC_WELL, 0.0, BranchSpec.psi(1))
    with pytest.raises(DomainError):
        build_local_solution(ASYMMETRIC_WELL, -1.0, BranchSpec.psi(3))
    with pytest.raises(ValueError):
        BranchSpec.psi(5)

    sol = build_local_solution(ASYMMETRIC_WELL, 1.0, BranchSpec.psi(1))
    with pytest.raises(DomainError):
        eval_psi(sol, 5.0)

    short = SeriesControl(max_terms=8, tail_window=4)
    with pytest.raises(NotConvergedError) as info:
        eval_psi(sol, 0.2, short)
    assert info.value.partial is not None
    assert not info.value.partial.converged

    psi, _ = eval_psi(sol, 0.2, short, strict=False)
    assert math.isfinite(psi)

    print("✅ Local solution errors test passed!\n")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
