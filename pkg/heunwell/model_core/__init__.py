"""
Model Core - Well parameters, unit conventions and the potential
"""

from .model import (
    Coordinate,
    Energy,
    WellParameters,
    energy_search_ceiling,
    potential_u,
    xi_of_z,
    z_of_xi,
)

__all__ = [
    "Coordinate",
    "Energy",
    "WellParameters",
    "energy_search_ceiling",
    "potential_u",
    "xi_of_z",
    "z_of_xi",
]
