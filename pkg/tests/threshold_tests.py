#!/usr/bin/env python3
"""
Tests for bound-state counting, threshold maps and the node scheduler.
"""

import asyncio
import math
import threading

import numpy as np
import pytest

from heunwell import DomainError, FdGrid, WellParameters, count_bound_states, fd_count_negative, find_eigenvalues
from heunwell.model_core.model import poschl_teller_energies
from heunwell.solver_core.node_scheduler import NodeScheduler
from heunwell.solver_core.threshold import threshold_scan, threshold_scan_async, wronskian_at_zero_energy

# shallow levels reach far out; the validation box must hold them
WIDE_GRID = FdGrid(z_span=100.0, points=40001)


@pytest.fixture(scope="module")
def coarse_map():
    return threshold_scan(15.0, resolution=10, workers=1)


def test_count_examples():
    print("Testing bound-state counts...")

    assert count_bound_states(WellParameters(w1=15, w2=12, w3=1)) == 3
    assert count_bound_states(WellParameters(w1=0, w2=5, w3=0)) == 0
    assert count_bound_states(WellParameters(w1=0, w2=-12.5, w3=0)) == 4
    assert count_bound_states(WellParameters(w1=0, w2=-11, w3=0)) == 3

    p = WellParameters(w1=4, w2=-3, w3=2)
    assert count_bound_states(p) == find_eigenvalues(p).count

    print("✅ Count examples test passed!\n")


def test_zero_energy_wronskian():
    print("Testing the E = 0 Wronskian...")

    value = wronskian_at_zero_energy(WellParameters(w1=15, w2=12, w3=1))
    print(f"W0(15, 12, 1) = {value:.6g}")
    assert abs(value) > 1e-6

    # Poschl-Teller gains a zero-energy state at w2 = -n(n+1)
    below = wronskian_at_zero_energy(WellParameters(w1=0, w2=-6.2, w3=0))
    above = wronskian_at_zero_energy(WellParameters(w1=0, w2=-5.8, w3=0))
    assert np.sign(below) != np.sign(above)

    print("✅ Zero-energy Wronskian test passed!\n")


def test_node_in_count_three_region():
    print("Testing the (12, 1) node at w1 = 15...")

    tmap = threshold_scan(15.0, w2_range=(10.0, 14.0), w3_range=(-1.0, 3.0), resolution=5, workers=1)
    assert tmap.count_at(12.0, 1.0) == 3
    assert not tmap.failed.any()

    print("✅ Count-three node test passed!\n")


def test_poschl_teller_line():
    """Counts along w3 = 0 at w1 = 0 follow the closed form, and curves separate them."""
    print("Testing threshold curves near the Poschl-Teller line...")

    tmap = threshold_scan(0.0, w2_range=(-14.5, -0.5), w3_range=(-2.0, 2.0), resolution=9, workers=1)
    middle = int(np.argmin(np.abs(tmap.w3_axis)))
    assert tmap.w3_axis[middle] == pytest.approx(0.0, abs=1e-12)
    for i, w2 in enumerate(tmap.w2_axis):
        assert int(tmap.counts[i, middle]) == len(poschl_teller_energies(float(w2)))

    print(f"Traced {len(tmap.critical_curves)} curves")
    levels = {c.emerging_level for c in tmap.critical_curves}
    assert {2, 3, 4} <= levels
    for curve in tmap.critical_curves:
        for a, b in curve.straddle_counts:
            if a is not None and b is not None:
                assert abs(a - b) == 1
        assert curve.points.shape[1] == 2
    pt_curve = next(c for c in tmap.critical_curves if c.emerging_level == 3)
    on_axis = pt_curve.points[np.abs(pt_curve.points[:, 1]) < 1e-12]
    assert on_axis.shape[0] == 1
    assert on_axis[0, 0] == pytest.approx(-6.0, abs=1e-3)

    print("✅ Poschl-Teller line test passed!\n")


def test_map_matches_fd_oracle(coarse_map):
    """Every node's count equals the Sturm count of the finite-difference Hamiltonian."""
    print("Testing the count map against the finite-difference oracle...")

    assert not coarse_map.failed.any()
    for i, w2 in enumerate(coarse_map.w2_axis):
        for j, w3 in enumerate(coarse_map.w3_axis):
            p = WellParameters(w1=15.0, w2=float(w2), w3=float(w3))
            ours = int(coarse_map.counts[i, j])
            oracle = fd_count_negative(p, WIDE_GRID)
            assert ours == oracle, f"{p.as_tuple()}: {ours} vs {oracle}"

    print("✅ FD oracle agreement test passed!\n")


def test_mirror_symmetry(coarse_map):
    """w3 -> -w3 mirrors the potential, so counts are symmetric."""
    print("Testing w3 mirror symmetry...")

    np.testing.assert_array_equal(coarse_map.counts, coarse_map.counts[:, ::-1])
    assert np.all(np.ma.compressed(coarse_map.counts) >= 0)

    print("✅ Mirror symmetry test passed!\n")


def test_repulsive_nodes_have_no_states():
    print("Testing repulsive nodes...")

    tmap = threshold_scan(0.0, w2_range=(1.0, 5.0), w3_range=(-0.5, 0.5), resolution=3, workers=1)
    assert np.all(tmap.counts == 0)
    assert tmap.critical_curves == []

    with pytest.raises(DomainError):
        threshold_scan(0.0, resolution=1)

    print("✅ Repulsive node test passed!\n")


async def test_parallel_scan_matches_inline(monkeypatch):
    print("Testing the scheduled scan...")

    monkeypatch.setenv("HEUNWELL_EXECUTOR", "thread")
    kwargs = dict(w2_range=(-12.0, 12.0), w3_range=(-4.0, 4.0), resolution=3)
    inline = threshold_scan(10.0, workers=1, **kwargs)
    scheduled = await threshold_scan_async(10.0, workers=3, **kwargs)
    np.testing.assert_array_equal(inline.counts, scheduled.counts)
    np.testing.assert_allclose(inline.zero_energy_wronskian, scheduled.zero_energy_wronskian)

    print("✅ Scheduled scan test passed!\n")


async def test_node_scheduler():
    print("Testing NodeScheduler...")

    scheduler = NodeScheduler(max_concurrent_nodes=2)
    gate = threading.Event()
    tasks = [asyncio.create_task(scheduler.run(f"node-{i}", gate.wait, 10.0)) for i in range(3)]
    for _ in range(500):
        if scheduler.status()["in_flight_nodes"] == 2:
            break
        await asyncio.sleep(0.01)
    status = scheduler.status()
    print(f"In flight: {status['in_flight_node_ids']}")
    assert status["in_flight_nodes"] == 2
    assert status["in_flight_node_ids"] == ["node-0", "node-1"]
    assert status["completed_nodes"] == 0

    gate.set()
    assert await asyncio.gather(*tasks) == [True, True, True]
    status = scheduler.status()
    assert status["in_flight_nodes"] == 0
    assert status["completed_nodes"] == 3

    assert await scheduler.run("node-3", sum, [1, 2, 3]) == 6
    with pytest.raises(ValueError):
        await scheduler.run("node-4", math.sqrt, -1.0)
    status = scheduler.status()
    assert status["completed_nodes"] == 4
    assert status["failed_nodes"] == 1
    assert status["in_flight_node_ids"] == []

    with pytest.raises(ValueError):
        NodeScheduler(max_concurrent_nodes=0)

    print("✅ NodeScheduler test passed!\n")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
