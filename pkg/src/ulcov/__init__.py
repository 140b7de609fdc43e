"""Uplink coverage and area spectral efficiency for dense small-cell
networks under a LoS/NLoS path loss model with fractional power control.

The package pairs an analytical evaluator (serving-distance distributions,
interference Laplace transforms, coverage/ASE integrals) with an exact
event-level Monte Carlo simulator that serves as its validation oracle.
"""

from .errors import ConfigurationError, DomainError, QuadratureError
from .pathloss import (
    LinkType,
    LosProfile,
    PathLossModel,
    PathLossSegment,
    PowerControl,
    cross_boundary,
    exponential_profile,
    linear_profile,
    los_probability,
    path_loss,
    single_slope_profile,
    three_gpp_path_loss,
    tx_power,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DomainError",
    "QuadratureError",
    "LinkType",
    "LosProfile",
    "PathLossModel",
    "PathLossSegment",
    "PowerControl",
    "cross_boundary",
    "exponential_profile",
    "linear_profile",
    "los_probability",
    "path_loss",
    "single_slope_profile",
    "three_gpp_path_loss",
    "tx_power",
    "__version__",
]
