"""
CSV and JSON writers for command results.

CSV columns use the dimensionless names E, W, z, psi, w1, w2, w3, count.
JSON is written with sorted keys and two-space indentation so repeated runs
produce identical files.
"""

import csv
import json
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, TextIO

import numpy as np

from ..solver_core.eigensolver import EigenResult, Wavefunction, WronskianSweep
from ..solver_core.threshold import ThresholdMap

logger = logging.getLogger(__name__)


@contextmanager
def _open_output(path: Optional[Path]) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f
    logger.info(f"Wrote {path}")


def _finite(value: float) -> Optional[float]:
    """JSON has no NaN; failed values become null."""
    value = float(value)
    return value if math.isfinite(value) else None


def write_csv(path: Optional[Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with _open_output(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def write_json(path: Optional[Path], doc: Dict[str, Any]) -> None:
    with _open_output(path) as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def eigen_result_doc(result: EigenResult) -> Dict[str, Any]:
    doc = result.model_dump(mode="json")
    doc["count"] = result.count
    doc["epsilons"] = result.epsilons
    return doc


def emit_eigen_result(result: EigenResult, path: Optional[Path], fmt: str) -> None:
    if fmt == "json":
        write_json(path, eigen_result_doc(result))
        return
    w1, w2, w3 = result.params.as_tuple()
    write_csv(path, ["w1", "w2", "w3", "E"], ([w1, w2, w3, e] for e in result.energies))


def emit_sweep(sweep: WronskianSweep, path: Optional[Path], fmt: str) -> None:
    """Non-converged energies are written with an empty W (null in JSON)."""
    ok = sweep.converged & np.isfinite(sweep.values)
    if fmt == "json":
        write_json(path, {
            "E": [float(e) for e in sweep.energies],
            "W": [_finite(w) if good else None for w, good in zip(sweep.values, ok)],
            "converged": [bool(c) for c in ok],
            "terms_used": [int(t) for t in sweep.terms_used],
        })
        return
    write_csv(path, ["E", "W"],
              ([float(e), float(w) if good else None] for e, w, good in zip(sweep.energies, sweep.values, ok)))


def emit_wavefunctions(waves: List[Wavefunction], path: Optional[Path], fmt: str) -> None:
    if fmt == "json":
        write_json(path, {"states": [
            {
                "E": w.energy,
                "z": w.z.tolist(),
                "psi": w.psi.tolist(),
                "z_match": w.z_match,
                "scale": w.scale,
                "derivative_mismatch": w.derivative_mismatch,
            }
            for w in waves
        ]})
        return
    write_csv(path, ["E", "z", "psi"],
              ([w.energy, float(z), float(psi)] for w in waves for z, psi in zip(w.z, w.psi)))


def threshold_doc(tmap: ThresholdMap) -> Dict[str, Any]:
    counts = [[None if tmap.failed[i, j] else int(tmap.counts[i, j]) for j in range(tmap.w3_axis.size)]
              for i in range(tmap.w2_axis.size)]
    return {
        "w1": tmap.w1,
        "w2": tmap.w2_axis.tolist(),
        "w3": tmap.w3_axis.tolist(),
        "count": counts,
        "failed": int(tmap.failed.sum()),
        "critical_curves": [
            {
                "points": c.points.tolist(),
                "emerging_level": c.emerging_level,
                "critical": c.critical,
            }
            for c in tmap.critical_curves
        ],
    }


def curves_path(path: Path) -> Path:
    """Sibling file holding the critical-curve polylines of a CSV threshold map."""
    return path.with_name(f"{path.stem}_curves{path.suffix}")


def emit_threshold(tmap: ThresholdMap, path: Optional[Path], fmt: str) -> None:
    """
    JSON holds the grid and the curves in one document. CSV writes one row per
    node, failed nodes with an empty count, and the curves to a sibling file
    (after the node table on stdout).
    """
    if fmt == "json":
        write_json(path, threshold_doc(tmap))
        return
    rows = []
    for i, w2 in enumerate(tmap.w2_axis):
        for j, w3 in enumerate(tmap.w3_axis):
            count = None if tmap.failed[i, j] else int(tmap.counts[i, j])
            rows.append([tmap.w1, float(w2), float(w3), count])
    write_csv(path, ["w1", "w2", "w3", "count"], rows)

    curve_rows = [[k, float(w2), float(w3)]
                  for k, c in enumerate(tmap.critical_curves) for w2, w3 in c.points]
    write_csv(None if path is None else curves_path(path), ["curve", "w2", "w3"], curve_rows)


def emit_table(path: Optional[Path], fmt: str, header: Sequence[str], rows: List[Sequence[Any]]) -> None:
    """Small tables (QES roots, oracle comparison) in either format."""
    if fmt == "json":
        write_json(path, {"rows": [
            {name: (_finite(v) if isinstance(v, float) else v) for name, v in zip(header, row)}
            for row in rows
        ]})
        return
    write_csv(path, header, rows)
