"""Capacity of MIMO links whose antennas fill fixed volumes.

Channels are modelled by sampled radiation patterns on a sphere quadrature
grid and an angular spread kernel coupling departure and arrival directions.
"""

from .antenna import AntennaArray, Box, PatternSamples, make_array, sample_pattern
from .asymptotics import REGIMES, Scenario, SweepSpec, default_spec, run_sweep
from .capacity import (
    CapacityResult,
    capacity_direct,
    capacity_finite_rank,
    capacity_fredholm,
    finite_rank_data_from_patterns,
)
from .errors import IllConditioned, InvalidArgument, NotPSDError, PreconditionFailure
from .operators import SnrConfig, build_A, build_H, build_K
from .sphere import Direction, build_grid, build_sh_basis, weyl_count
from .spread import ScattererSet, SmoothSpread, random_scatterers, sample_finite_rank, sample_smooth

__all__ = [
    "AntennaArray", "Box", "PatternSamples", "make_array", "sample_pattern",
    "REGIMES", "Scenario", "SweepSpec", "default_spec", "run_sweep",
    "CapacityResult", "capacity_direct", "capacity_finite_rank", "capacity_fredholm",
    "finite_rank_data_from_patterns",
    "IllConditioned", "InvalidArgument", "NotPSDError", "PreconditionFailure",
    "SnrConfig", "build_A", "build_H", "build_K",
    "Direction", "build_grid", "build_sh_basis", "weyl_count",
    "ScattererSet", "SmoothSpread", "random_scatterers", "sample_finite_rank", "sample_smooth",
]
