"""
Finite-difference reference spectrum.

-psi'' + U psi = lambda psi on a uniform grid with Dirichlet ends becomes a
symmetric tridiagonal matrix with diagonal 2/h^2 + U(z_i) and off-diagonal
-1/h^2. Bound states are its negative eigenvalues, E = -lambda.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.linalg import eigh_tridiagonal

from ..model_core.model import Energy, WellParameters, potential_u

logger = logging.getLogger(__name__)


class FdGrid(BaseModel):
    """Uniform grid on [-z_span, z_span]; the end points carry the Dirichlet condition."""

    model_config = ConfigDict(frozen=True)

    z_span: float = 25.0
    points: int = 8001

    @model_validator(mode="after")
    def _check_grid(self) -> "FdGrid":
        if not self.z_span > 0:
            raise ValueError(f"z_span must be positive, got {self.z_span}")
        if self.points < 5 or self.points % 2 == 0:
            raise ValueError(f"points must be odd and >= 5 so that z = 0 is a node, got {self.points}")
        return self

    @property
    def h(self) -> float:
        return 2.0 * self.z_span / (self.points - 1)

    def interior(self) -> NDArray[np.float64]:
        return np.linspace(-self.z_span, self.z_span, self.points)[1:-1]

    def refined(self) -> "FdGrid":
        """Same box, half the spacing."""
        return FdGrid(z_span=self.z_span, points=2 * (self.points - 1) + 1)


@dataclass
class FdStates:
    """Oracle eigenpairs; columns of `vectors` follow increasing E."""

    energies: NDArray[np.float64]
    z: NDArray[np.float64]
    vectors: NDArray[np.float64]


def _matrix(p: WellParameters, g: FdGrid) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    z = g.interior()
    inv_h2 = 1.0 / (g.h * g.h)
    diag = 2.0 * inv_h2 + np.asarray(potential_u(z, p))
    off = np.full(z.size - 1, -inv_h2)
    return diag, off


def sturm_count(diag: ArrayLike, off: ArrayLike, shift: float) -> int:
    """
    Number of eigenvalues of the symmetric tridiagonal (diag, off) below shift.

    Counts negative pivots of the LDL^T factorization of T - shift I.
    """
    d_list = np.asarray(diag, dtype=float).tolist()
    e2_list = (np.asarray(off, dtype=float) ** 2).tolist()
    tiny = np.finfo(float).tiny
    count = 0
    pivot = d_list[0] - shift
    if pivot < 0:
        count += 1
    for d, e2 in zip(d_list[1:], e2_list):
        if pivot == 0.0:
            pivot = tiny
        pivot = (d - shift) - e2 / pivot
        if pivot < 0:
            count += 1
    return count


def fd_count_negative(p: WellParameters, g: Optional[FdGrid] = None) -> int:
    """Exact count of discretized bound states (negative matrix eigenvalues)."""
    g = g or FdGrid()
    diag, off = _matrix(p, g)
    return sturm_count(diag, off, 0.0)


def _lowest(diag: NDArray[np.float64], off: NDArray[np.float64], m: int) -> NDArray[np.float64]:
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                            select_range=(0, m - 1), lapack_driver="stebz")


def fd_spectrum(p: WellParameters, g: Optional[FdGrid] = None, k: int = 10,
                richardson: bool = True) -> List[Energy]:
    """
    Up to k most strongly bound levels, in increasing E.

    Eigenvalues come from Sturm bisection (LAPACK stebz). With richardson,
    each level is recomputed at half the spacing and extrapolated as
    (4 E_{h/2} - E_h)/3, removing the O(h^2) error.

    Args:
        p: Well parameters
        g: Grid
        k: Maximum number of levels, at least 1
        richardson: Apply one Richardson step

    Returns:
        List[Energy]: Fewer than k when the spectrum is exhausted
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    g = g or FdGrid()
    diag, off = _matrix(p, g)
    available = sturm_count(diag, off, 0.0)
    if k > available:
        logger.warning(f"Requested {k} levels but the oracle grid holds {available} for {p.as_tuple()}")
    m = min(k, available)
    if m == 0:
        return []

    coarse = -_lowest(diag, off, m)
    energies = coarse
    if richardson:
        fine_diag, fine_off = _matrix(p, g.refined())
        m_fine = min(m, sturm_count(fine_diag, fine_off, 0.0))
        fine = -_lowest(fine_diag, fine_off, m_fine)
        energies = coarse.copy()
        energies[:m_fine] = (4.0 * fine - coarse[:m_fine]) / 3.0
    # drop levels pushed across threshold by extrapolation
    energies = np.sort(energies[energies > 0])
    logger.debug(f"Oracle spectrum for {p.as_tuple()} on h={g.h:.4g}: {energies.tolist()}")
    return [Energy(E=float(e)) for e in energies]


def fd_eigenvectors(p: WellParameters, g: Optional[FdGrid] = None, k: int = 10) -> FdStates:
    """
    Oracle eigenvectors of the k most strongly bound levels.

    Vectors are normalized so that sum psi^2 h = 1, with the largest
    magnitude sample positive. Columns follow increasing E.
    """
    g = g or FdGrid()
    diag, off = _matrix(p, g)
    m = min(k, sturm_count(diag, off, 0.0))
    z = g.interior()
    if m == 0:
        return FdStates(energies=np.empty(0), z=z, vectors=np.empty((z.size, 0)))
    lam, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, m - 1), lapack_driver="stebz")
    order = np.argsort(-lam)
    energies = -lam[order]
    vecs = vecs[:, order] / np.sqrt(g.h)
    peaks = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(m)]
    vecs = vecs * np.where(peaks < 0, -1.0, 1.0)
    return FdStates(energies=energies, z=z, vectors=vecs)
