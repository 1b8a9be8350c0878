"""Propagators on the punctured plane by winding-sector decomposition."""

from .core import (
    TWO_PI,
    DomainError,
    EvaluationError,
    PolarPoint,
    PropagatorValue,
    Regime,
    SamplingError,
    SectorLabel,
    TimeMode,
    TruncationPolicy,
    UsageError,
)
from .quadrature import QuadratureSpec
from .propagators import (
    boson_fermion_K,
    circle_flux,
    circle_flux_dual,
    flux_tube_K,
    free_2d,
    gauge_phase,
    sector_K,
    sector_sum,
    sector_values,
    two_anyon_K,
)
from .lattice_oracle import (
    LatticeConfig,
    WindingHistogram,
    brownian_winding_distribution,
    effective_potential,
    midpoint_radius,
    transfer_matrix_Kn,
    transfer_matrix_sectors,
)

__version__ = "0.1.0"
