from abc import ABC, abstractmethod
import logging
from typing import List, Optional

from ..model_core.model import WellParameters
from ..oracle_core.fd_oracle import FdGrid, fd_count_negative, fd_spectrum
from ..series_core.frobenius import SSign
from ..series_core.heun import SeriesControl
from ..settings import get_default_solver
from .eigensolver import SolveOptions, find_eigenvalues

logger = logging.getLogger(__name__)


class BaseSpectrumSolver(ABC):
    """Base spectrum solver with configurable default settings."""

    name = "base"
    DEFAULT_CONFIG: dict = {}

    def __init__(self, **kwargs):
        """
        Initialize the solver; keyword arguments override DEFAULT_CONFIG entries.

        Args:
            **kwargs: Solver-specific settings. None values keep the default.
        """
        self.config = self.DEFAULT_CONFIG.copy()
        unknown = set(kwargs) - set(self.config)
        if unknown:
            raise ValueError(f"Unknown {self.name} solver settings: {sorted(unknown)}")
        self.config.update({k: v for k, v in kwargs.items() if v is not None})

    @abstractmethod
    def solve(self, p: WellParameters) -> List[float]:
        """Bound-state energies E, increasing."""
        pass

    def count(self, p: WellParameters) -> int:
        return len(self.solve(p))


class WronskianSpectrumSolver(BaseSpectrumSolver):
    """Wronskian zeros of the two local Heun solutions."""

    name = "wronskian"
    DEFAULT_CONFIG = {
        "z_match": 0.2,
        "grid_points": 2000,
        "refine_tol": 1e-10,
        "E_floor": 1e-6,
        "ceiling_override": None,
        "s_sign": SSign.MINUS,
        "max_terms": 5000,
        "tail_tol": 1e-14,
        "tail_window": 4,
    }

    @property
    def options(self) -> SolveOptions:
        c = self.config
        return SolveOptions(
            z_match=c["z_match"],
            grid_points=c["grid_points"],
            refine_tol=c["refine_tol"],
            E_floor=c["E_floor"],
            ceiling_override=c["ceiling_override"],
            s_sign=SSign(c["s_sign"]),
            series=SeriesControl(max_terms=c["max_terms"], tail_tol=c["tail_tol"],
                                 tail_window=c["tail_window"]),
        )

    def solve(self, p: WellParameters) -> List[float]:
        return find_eigenvalues(p, self.options).energies


class FiniteDifferenceSpectrumSolver(BaseSpectrumSolver):
    """Dirichlet finite differences with Sturm bisection."""

    name = "fd"
    DEFAULT_CONFIG = {
        "z_span": 25.0,
        "points": 8001,
        "k": 50,
        "richardson": True,
    }

    @property
    def grid(self) -> FdGrid:
        return FdGrid(z_span=self.config["z_span"], points=self.config["points"])

    def solve(self, p: WellParameters) -> List[float]:
        levels = fd_spectrum(p, self.grid, k=self.config["k"], richardson=self.config["richardson"])
        return [level.E for level in levels]

    def count(self, p: WellParameters) -> int:
        return fd_count_negative(p, self.grid)


class SpectrumSolver:
    """Factory class for creating spectrum solvers by method name."""

    @staticmethod
    def create(method: Optional[str] = None, **kwargs) -> BaseSpectrumSolver:
        """
        Create and return a spectrum solver.

        Args:
            method (str, optional): "wronskian" or "fd". Defaults to the HEUNWELL_SOLVER env var or "wronskian".
            **kwargs: Configuration parameters passed to the solver constructor

        Returns:
            BaseSpectrumSolver: Instance of the requested solver

        Example:
            solver = SpectrumSolver.create("fd", points=10001)
        """
        if method is None or not method.strip():
            method = get_default_solver()
        method = method.lower().strip()

        if method == "wronskian":
            return WronskianSpectrumSolver(**kwargs)
        elif method in ("fd", "finite_difference", "finite-difference"):
            return FiniteDifferenceSpectrumSolver(**kwargs)
        else:
            logger.error(f"Unsupported spectrum solver: {method}")
            raise ValueError(f"Unsupported spectrum solver: {method}")
