"""
Bound-state counts over the (w2, w3) plane and the curves where levels emerge.

A level leaves the continuum where a zero-energy solution decays on both
sides, i.e. where the E = 0 Wronskian of the q = 0 local solutions vanishes.
Counts at grid nodes come from the full energy scan; the E = 0 Wronskian is
used only to trace the curves between nodes.
"""

import asyncio
import logging
from collections import Counter, defaultdict
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from ..errors import DomainError, HeunWellError
from ..model_core.model import WellParameters
from ..series_core.frobenius import BranchSpec, SSign, eval_psi, zero_energy_solution
from ..series_core.heun import SeriesControl
from ..settings import get_executor_kind, get_worker_count
from .eigensolver import SolveOptions, scan_energy_grid
from .node_scheduler import NodeScheduler

logger = logging.getLogger(__name__)

DEFAULT_RANGE = (-30.0, 30.0)
DEFAULT_RESOLUTION = 60
CROSSING_STEPS = 30

EdgeId = Tuple[int, int, int]  # (axis, i, j): node (i, j) to its neighbour along axis


@dataclass
class CriticalCurve:
    """A polyline in (w2, w3) where a level sits exactly at E = 0."""

    points: NDArray[np.float64]
    straddle_counts: List[Tuple[Optional[int], Optional[int]]]
    emerging_level: Optional[int]
    critical: bool


@dataclass
class ThresholdMap:
    """
    Bound-state counts on a (w2, w3) grid at fixed w1.

    counts[i, j] belongs to (w2_axis[i], w3_axis[j]) and is masked where
    the node failed; zero_energy_wronskian is NaN there.
    """

    w1: float
    w2_axis: NDArray[np.float64]
    w3_axis: NDArray[np.float64]
    counts: np.ma.MaskedArray
    zero_energy_wronskian: NDArray[np.float64]
    critical_curves: List[CriticalCurve] = field(default_factory=list)

    @property
    def failed(self) -> NDArray[np.bool_]:
        return np.ma.getmaskarray(self.counts)

    def count_at(self, w2: float, w3: float) -> Optional[int]:
        """Count at the node nearest to (w2, w3)."""
        i = int(np.argmin(np.abs(self.w2_axis - w2)))
        j = int(np.argmin(np.abs(self.w3_axis - w3)))
        if self.failed[i, j]:
            return None
        return int(self.counts[i, j])


def wronskian_at_zero_energy(p: WellParameters, z_match: float = 0.2,
                             ctl: Optional[SeriesControl] = None, s_sign: SSign = SSign.MINUS) -> float:
    """
    Normalized Wronskian of the q = 0 solutions e^{s xi} H at z_match.

    Raises:
        DomainError: If w1 < 0 or z_match is outside the overlap region
        NotConvergedError: If either series fails to converge
    """
    psi1, dpsi1 = eval_psi(zero_energy_solution(p, BranchSpec.psi(1, s_sign)), z_match, ctl)
    psi3, dpsi3 = eval_psi(zero_energy_solution(p, BranchSpec.psi(3, s_sign)), z_match, ctl)
    w = psi1 * dpsi3 - psi3 * dpsi1
    return w / ((abs(psi1) + abs(dpsi1)) * (abs(psi3) + abs(dpsi3)))


def count_bound_states(p: WellParameters, opts: Optional[SolveOptions] = None) -> int:
    """
    Number of bound states, equal to len(find_eigenvalues(p, opts).energies).

    Every sign change of the scanned Wronskian is refined into exactly one
    level, so counting sign changes gives the same number without the
    bisection.
    """
    return int(scan_energy_grid(p, opts).cells.size)


def _scan_node(w1: float, w2: float, w3: float, opts: SolveOptions) -> Tuple[Optional[int], float]:
    """Count and E = 0 Wronskian at one node; (None, nan) when the node fails."""
    p = WellParameters(w1=w1, w2=w2, w3=w3)
    try:
        count = count_bound_states(p, opts)
        w0 = wronskian_at_zero_energy(p, opts.z_match, opts.series, opts.s_sign)
    except HeunWellError as e:
        logger.warning(f"Threshold node {p.as_tuple()} failed: {e}")
        return None, float("nan")
    return count, w0


def _make_executor(workers: int) -> Executor:
    if get_executor_kind() == "thread":
        return ThreadPoolExecutor(max_workers=workers)
    return ProcessPoolExecutor(max_workers=workers)


def _axes(w2_range: Tuple[float, float], w3_range: Tuple[float, float], resolution: int):
    if resolution < 2:
        raise DomainError(f"resolution must be >= 2, got {resolution}")
    if w2_range[1] <= w2_range[0] or w3_range[1] <= w3_range[0]:
        raise DomainError(f"Scan ranges must be increasing, got {w2_range} and {w3_range}")
    return np.linspace(*w2_range, resolution), np.linspace(*w3_range, resolution)


def _edge_points(ax2: NDArray[np.float64], ax3: NDArray[np.float64], edge: EdgeId):
    axis, i, j = edge
    start = np.array([ax2[i], ax3[j]])
    end = np.array([ax2[i + 1], ax3[j]]) if axis == 0 else np.array([ax2[i], ax3[j + 1]])
    return start, end


def _edge_end(edge: EdgeId) -> Tuple[int, int]:
    axis, i, j = edge
    return (i + 1, j) if axis == 0 else (i, j + 1)


def _locate_crossing(w1: float, start: NDArray[np.float64], end: NDArray[np.float64], w_start: float,
                     opts: SolveOptions, steps: int) -> NDArray[np.float64]:
    """Bisect the E = 0 Wronskian along a grid edge."""
    lo, hi = 0.0, 1.0
    neg_start = np.signbit(w_start)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        w2, w3 = start + mid * (end - start)
        try:
            w_mid = wronskian_at_zero_energy(WellParameters(w1=w1, w2=w2, w3=w3),
                                             opts.z_match, opts.series, opts.s_sign)
        except HeunWellError as e:
            logger.warning(f"Crossing refinement stopped at ({w2:.6g}, {w3:.6g}): {e}")
            break
        if np.signbit(w_mid) == neg_start:
            lo = mid
        else:
            hi = mid
    return start + 0.5 * (lo + hi) * (end - start)


def _cell_segments(w0: NDArray[np.float64], i: int, j: int, crossings: Dict[EdgeId, NDArray[np.float64]]):
    """Marching-squares segments of one cell, joined by edge ids."""
    edges = [(0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j)]
    cut = [e for e in edges if e in crossings]
    if len(cut) == 2:
        return [(cut[0], cut[1])]
    if len(cut) == 4:
        # saddle: the centre value decides which corners are connected
        centre = 0.25 * (w0[i, j] + w0[i + 1, j] + w0[i + 1, j + 1] + w0[i, j + 1])
        if np.signbit(centre) == np.signbit(w0[i, j]):
            return [(edges[0], edges[1]), (edges[2], edges[3])]
        return [(edges[3], edges[0]), (edges[1], edges[2])]
    return []


def _chain(segments: List[Tuple[EdgeId, EdgeId]]) -> List[List[EdgeId]]:
    neighbours: Dict[EdgeId, List[EdgeId]] = defaultdict(list)
    for a, b in segments:
        neighbours[a].append(b)
        neighbours[b].append(a)

    visited = set()
    chains = []
    # open polylines start from their ends; whatever is left are loops
    starts = [e for e, n in neighbours.items() if len(n) == 1] + list(neighbours)
    for start in starts:
        if start in visited:
            continue
        chain = [start]
        visited.add(start)
        current = start
        while True:
            nxt = next((n for n in neighbours[current] if n not in visited), None)
            if nxt is None:
                break
            chain.append(nxt)
            visited.add(nxt)
            current = nxt
        if len(chain) > 2 and start in neighbours[current]:
            chain.append(start)
        chains.append(chain)
    return chains


def _trace_curves(w1: float, ax2: NDArray[np.float64], ax3: NDArray[np.float64],
                  counts: np.ma.MaskedArray, w0: NDArray[np.float64],
                  opts: SolveOptions, steps: int) -> List[CriticalCurve]:
    n2, n3 = w0.shape
    crossings: Dict[EdgeId, NDArray[np.float64]] = {}
    for axis, (di, dj) in enumerate(((1, 0), (0, 1))):
        for i in range(n2 - di):
            for j in range(n3 - dj):
                a, b = w0[i, j], w0[i + di, j + dj]
                if not (np.isfinite(a) and np.isfinite(b)) or np.signbit(a) == np.signbit(b):
                    continue
                edge = (axis, i, j)
                start, end = _edge_points(ax2, ax3, edge)
                crossings[edge] = _locate_crossing(w1, start, end, a, opts, steps)
    logger.debug(f"Located {len(crossings)} E = 0 crossings on grid edges")

    segments = []
    for i in range(n2 - 1):
        for j in range(n3 - 1):
            segments.extend(_cell_segments(w0, i, j, crossings))
    chained = _chain(segments)
    # crossings on edges no segment uses (a lone cut next to a failed node) form single-point curves
    used = {e for chain in chained for e in chain}
    chained.extend([e] for e in crossings if e not in used)

    def node_count(node: Tuple[int, int]) -> Optional[int]:
        return None if np.ma.getmaskarray(counts)[node] else int(counts[node])

    curves = []
    for chain in chained:
        straddles = [(node_count(e[1:]), node_count(_edge_end(e))) for e in chain]
        steps_up = [max(a, b) for a, b in straddles if a is not None and b is not None and abs(a - b) == 1]
        level = Counter(steps_up).most_common(1)[0][0] if steps_up else None
        curves.append(CriticalCurve(
            points=np.array([crossings[e] for e in chain]),
            straddle_counts=straddles,
            emerging_level=level,
            critical=level == 1,
        ))
        logger.debug(f"Curve with {len(chain)} points, emerging level {level}")
    curves.sort(key=lambda c: (c.emerging_level is None, c.emerging_level or 0, c.points[0, 0], c.points[0, 1]))
    return curves


def _assemble(w1, ax2, ax3, results, opts, crossing_steps) -> ThresholdMap:
    n2, n3 = ax2.size, ax3.size
    raw = np.zeros((n2, n3), dtype=np.int64)
    mask = np.zeros((n2, n3), dtype=bool)
    w0 = np.full((n2, n3), np.nan)
    for order, (count, value) in results:
        i, j = divmod(order, n3)
        if count is None:
            mask[i, j] = True
        else:
            raw[i, j] = count
            w0[i, j] = value
    counts = np.ma.MaskedArray(raw, mask=mask)
    if mask.any():
        logger.warning(f"{int(mask.sum())} of {mask.size} threshold nodes failed")
    curves = _trace_curves(w1, ax2, ax3, counts, w0, opts, crossing_steps)
    return ThresholdMap(w1=w1, w2_axis=ax2, w3_axis=ax3, counts=counts,
                        zero_energy_wronskian=w0, critical_curves=curves)


async def threshold_scan_async(w1: float,
                               w2_range: Tuple[float, float] = DEFAULT_RANGE,
                               w3_range: Tuple[float, float] = DEFAULT_RANGE,
                               resolution: int = DEFAULT_RESOLUTION,
                               opts: Optional[SolveOptions] = None,
                               workers: Optional[int] = None,
                               crossing_steps: int = CROSSING_STEPS) -> ThresholdMap:
    """
    Scan the grid with up to `workers` nodes in flight; see threshold_scan.
    """
    opts = opts or SolveOptions()
    workers = workers or get_worker_count()
    ax2, ax3 = _axes(w2_range, w3_range, resolution)
    nodes = [(order, float(w2), float(w3))
             for order, (w2, w3) in enumerate((w2, w3) for w2 in ax2 for w3 in ax3)]
    logger.info(f"Threshold scan at w1={w1}: {len(nodes)} nodes, {workers} workers")

    executor = _make_executor(workers) if workers > 1 else None
    scheduler = NodeScheduler(max_concurrent_nodes=workers, executor=executor)
    try:
        async def run_node(order: int, w2: float, w3: float):
            result = await scheduler.run(f"node-{order}", _scan_node, w1, w2, w3, opts)
            return (order, result)

        unordered = await asyncio.gather(*(run_node(*node) for node in nodes))
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    results = sorted(unordered, key=lambda x: x[0])
    logger.info(f"Threshold scan at w1={w1}: {scheduler.completed} nodes completed "
                f"in {scheduler.node_seconds:.2f} node-seconds")
    return _assemble(w1, ax2, ax3, results, opts, crossing_steps)


def threshold_scan(w1: float,
                   w2_range: Tuple[float, float] = DEFAULT_RANGE,
                   w3_range: Tuple[float, float] = DEFAULT_RANGE,
                   resolution: int = DEFAULT_RESOLUTION,
                   opts: Optional[SolveOptions] = None,
                   workers: Optional[int] = None,
                   crossing_steps: int = CROSSING_STEPS) -> ThresholdMap:
    """
    Bound-state counts and E = 0 curves on a resolution x resolution grid.

    With one worker every node is computed inline; otherwise nodes go
    through a NodeScheduler onto a process or thread pool
    (HEUNWELL_EXECUTOR). Results are assembled in grid order either way.

    Args:
        w1: Fixed well depth parameter
        w2_range: (min, max) of w2
        w3_range: (min, max) of w3
        resolution: Nodes per axis, at least 2
        opts: Solve options for the per-node count
        workers: Worker cap; defaults to HEUNWELL_THREADS
        crossing_steps: Bisection steps per located crossing

    Returns:
        ThresholdMap: Failed nodes are masked rather than raised
    """
    opts = opts or SolveOptions()
    workers = workers or get_worker_count()
    if workers > 1:
        return asyncio.run(threshold_scan_async(w1, w2_range, w3_range, resolution, opts,
                                                workers, crossing_steps))

    ax2, ax3 = _axes(w2_range, w3_range, resolution)
    logger.info(f"Threshold scan at w1={w1}: {ax2.size * ax3.size} nodes inline")
    results = []
    for order, (w2, w3) in enumerate((w2, w3) for w2 in ax2 for w3 in ax3):
        results.append((order, _scan_node(w1, float(w2), float(w3), opts)))
    return _assemble(w1, ax2, ax3, results, opts, crossing_steps)
