"""
Oracle Core - Finite-difference reference spectrum for cross-checks
"""

from .fd_oracle import (
    FdGrid,
    FdStates,
    fd_count_negative,
    fd_eigenvectors,
    fd_spectrum,
    sturm_count,
)

__all__ = [
    "FdGrid",
    "FdStates",
    "fd_count_negative",
    "fd_eigenvectors",
    "fd_spectrum",
    "sturm_count",
]
