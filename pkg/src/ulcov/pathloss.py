"""Propagation primitives: LoS probability profiles, piecewise path loss,
fractional power control, and the LoS/NLoS equal-loss boundary maps.

Units are kilometres for distances and linear milliwatts for powers
throughout; dB/dBm conversion happens only at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "LinkType",
    "LosProfile",
    "PathLossSegment",
    "PathLossModel",
    "PowerControl",
    "los_probability",
    "path_loss",
    "tx_power",
    "cross_boundary",
    "three_gpp_path_loss",
    "linear_profile",
    "exponential_profile",
    "single_slope_profile",
    "THREE_GPP_INTERCEPT_LOS",
    "THREE_GPP_INTERCEPT_NLOS",
    "THREE_GPP_ALPHA_LOS",
    "THREE_GPP_ALPHA_NLOS",
    "DEFAULT_LOS_CUTOFF_KM",
]


class LinkType(str, Enum):
    LOS = "los"
    NLOS = "nlos"

    @property
    def other(self) -> "LinkType":
        return LinkType.NLOS if self is LinkType.LOS else LinkType.LOS


# 3GPP small-cell defaults (linear attenuation at a 1 km reference, i.e.
# 103.8 + 20.9 log10(R) dB for LoS and 145.4 + 37.5 log10(R) dB for NLoS).
THREE_GPP_INTERCEPT_LOS = 10.0**10.38
THREE_GPP_INTERCEPT_NLOS = 10.0**14.54
THREE_GPP_ALPHA_LOS = 2.09
THREE_GPP_ALPHA_NLOS = 3.75
DEFAULT_LOS_CUTOFF_KM = 0.3

# Tail cut for profiles that never reach exactly zero: beyond the radius
# where the LoS probability drops under this threshold it is treated as 0,
# which bounds candidate searches in the simulator.
_LOS_SUPPORT_EPS = 1e-12


def _validate_positive_distance(r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("distance must be positive and finite (km)")
    return arr


@dataclass(frozen=True)
class LosProfile:
    """Distance-dependent LoS probability.

    ``linear``: 1 - r/d1 up to the cutoff d1, zero beyond.
    ``exponential``: 1 - 5 exp(-R1/r) up to d1 = R1/ln(10), then
    5 exp(-r/R2); the two branches do not meet at d1 (the printed model is
    discontinuous there) and values are clamped to [0, 1].
    ``single_slope``: identically zero, the no-LoS baseline.
    """

    kind: str
    d1: float = 0.0
    R1: float = 0.0
    R2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "exponential", "single_slope"):
            raise ConfigurationError(f"unknown LoS profile kind {self.kind!r}")
        if self.kind == "linear" and self.d1 <= 0.0:
            raise ConfigurationError("linear profile requires d1 > 0")
        if self.kind == "exponential" and (self.R1 <= 0.0 or self.R2 <= 0.0):
            raise ConfigurationError("exponential profile requires R1, R2 > 0")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def linear(d1: float = DEFAULT_LOS_CUTOFF_KM) -> "LosProfile":
        return LosProfile(kind="linear", d1=d1)

    @staticmethod
    def exponential(R1: float = 0.156, R2: float = 0.03) -> "LosProfile":
        return LosProfile(kind="exponential", d1=R1 / math.log(10.0), R1=R1, R2=R2)

    @staticmethod
    def single_slope() -> "LosProfile":
        return LosProfile(kind="single_slope", d1=0.0)

    # -- evaluation --------------------------------------------------------
    def los_probability(self, r) -> np.ndarray | float:
        """Pr[LoS] at distance ``r`` (km); exact boundary points take the
        lower branch."""
        arr = _validate_positive_distance(r)
        if self.kind == "single_slope":
            out = np.zeros_like(arr)
        elif self.kind == "linear":
            out = np.where(arr <= self.d1, 1.0 - arr / self.d1, 0.0)
        else:
            lower = 1.0 - 5.0 * np.exp(-self.R1 / arr)
            upper = 5.0 * np.exp(-arr / self.R2)
            out = np.where(arr <= self.d1, lower, upper)
            out = np.clip(out, 0.0, 1.0)
        if np.isscalar(r) or np.ndim(r) == 0:
            return float(out)
        return out

    def support_radius(self) -> float:
        """Radius beyond which the LoS probability is treated as zero."""
        if self.kind == "linear":
            return self.d1
        if self.kind == "single_slope":
            return 0.0
        return self.R2 * math.log(5.0 / _LOS_SUPPORT_EPS)

    def material_radius(self, threshold: float = 0.01) -> float:
        """Radius beyond which Pr[LoS] < threshold; used for region sizing."""
        if self.kind == "linear":
            return self.d1 * (1.0 - threshold)
        if self.kind == "single_slope":
            return 0.0
        return max(self.d1, self.R2 * math.log(5.0 / threshold))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Interior distances where the profile changes branch."""
        if self.kind in ("linear", "exponential"):
            return (self.d1,)
        return ()


@dataclass(frozen=True)
class PathLossSegment:
    d_lo: float
    d_hi: float
    a_los: float
    alpha_los: float
    a_nlos: float
    alpha_nlos: float

    def __post_init__(self):
        if not (self.d_lo >= 0.0 and self.d_hi > self.d_lo):
            raise ConfigurationError("segment bounds must satisfy 0 <= d_lo < d_hi")
        if min(self.a_los, self.a_nlos) <= 0.0:
            raise ConfigurationError("intercepts must be positive")
        if min(self.alpha_los, self.alpha_nlos) <= 0.0:
            raise ConfigurationError("exponents must be positive")
        if not self.alpha_nlos > self.alpha_los:
            raise ConfigurationError("NLoS exponent must exceed LoS exponent")

    def intercept(self, link: LinkType) -> float:
        return self.a_los if link is LinkType.LOS else self.a_nlos

    def exponent(self, link: LinkType) -> float:
        return self.alpha_los if link is LinkType.LOS else self.alpha_nlos


@dataclass(frozen=True)
class PathLossModel:
    """Piecewise power-law attenuation, one (LoS, NLoS) pair per segment.

    Segments partition (0, inf); distances on a boundary belong to the
    lower segment.
    """

    segments: tuple[PathLossSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ConfigurationError("at least one segment required")
        if self.segments[0].d_lo != 0.0:
            raise ConfigurationError("first segment must start at 0")
        if not math.isinf(self.segments[-1].d_hi):
            raise ConfigurationError("last segment must extend to infinity")
        for prev, cur in zip(self.segments, self.segments[1:]):
            if prev.d_hi != cur.d_lo:
                raise ConfigurationError("segments must be contiguous and increasing")

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def boundaries(self) -> tuple[float, ...]:
        return tuple(s.d_hi for s in self.segments[:-1])

    def _segment_index(self, r: np.ndarray) -> np.ndarray:
        if len(self.segments) == 1:
            return np.zeros(np.shape(r), dtype=np.intp)
        uppers = np.array(self.boundaries)
        return np.searchsorted(uppers, r, side="left")

    def attenuation(self, r, link: LinkType) -> np.ndarray | float:
        """zeta(r) for the given link type (dimensionless, > 0)."""
        arr = _validate_positive_distance(r)
        if len(self.segments) == 1:
            seg = self.segments[0]
            out = seg.intercept(link) * arr ** seg.exponent(link)
        else:
            idx = self._segment_index(arr)
            a = np.array([s.intercept(link) for s in self.segments])[idx]
            alpha = np.array([s.exponent(link) for s in self.segments])[idx]
            out = a * arr**alpha
        if np.isscalar(r) or np.ndim(r) == 0:
            return float(out)
        return out

    def equal_loss_distance(self, r, from_link: LinkType) -> np.ndarray | float:
        """Distance at which the opposite link type matches the loss at ``r``.

        Piecewise-invertible: the target law is inverted segment by segment;
        if the loss level falls into a jump between segments, the boundary
        distance is returned (infimum of the upper level set).
        """
        arr = _validate_positive_distance(r)
        zeta = np.asarray(self.attenuation(arr, from_link), dtype=float)
        to = from_link.other
        if len(self.segments) == 1:
            seg = self.segments[0]
            out = (zeta / seg.intercept(to)) ** (1.0 / seg.exponent(to))
        else:
            out = np.empty_like(zeta)
            remaining = np.ones(zeta.shape, dtype=bool)
            for seg in self.segments:
                cand = (zeta / seg.intercept(to)) ** (1.0 / seg.exponent(to))
                inside = remaining & (cand > seg.d_lo) & (cand <= seg.d_hi)
                out[inside] = cand[inside]
                remaining &= ~inside
                # Level in the jump below this segment: clamp to its lower edge.
                low_val = seg.intercept(to) * seg.d_lo ** seg.exponent(to) if seg.d_lo > 0 else 0.0
                jumped = remaining & (zeta <= low_val)
                out[jumped] = seg.d_lo
                remaining &= ~jumped
            out[remaining] = np.inf
        if np.isscalar(r) or np.ndim(r) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class PowerControl:
    """Fractional path loss compensation: transmit power p0 * zeta(r)**epsilon."""

    p0_mw: float
    epsilon: float

    def __post_init__(self):
        if self.p0_mw <= 0.0:
            raise ConfigurationError("baseline power p0 must be positive (mW)")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigurationError("compensation factor epsilon must lie in (0, 1]")


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def los_probability(profile: LosProfile, r) -> np.ndarray | float:
    return profile.los_probability(r)


def path_loss(model: PathLossModel, r, link: LinkType) -> np.ndarray | float:
    return model.attenuation(r, link)


def tx_power(pc: PowerControl, zeta) -> np.ndarray | float:
    """UE transmit power p0 * zeta**epsilon (mW)."""
    arr = np.asarray(zeta, dtype=float)
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("attenuation must be positive and finite")
    out = pc.p0_mw * arr**pc.epsilon
    if np.isscalar(zeta) or np.ndim(zeta) == 0:
        return float(out)
    return out


def cross_boundary(model: PathLossModel, r, from_link: LinkType) -> np.ndarray | float:
    return model.equal_loss_distance(r, from_link)


def three_gpp_path_loss(
    a_los: float = THREE_GPP_INTERCEPT_LOS,
    alpha_los: float = THREE_GPP_ALPHA_LOS,
    a_nlos: float = THREE_GPP_INTERCEPT_NLOS,
    alpha_nlos: float = THREE_GPP_ALPHA_NLOS,
) -> PathLossModel:
    """Single-segment LoS/NLoS power-law model with 3GPP defaults."""
    return PathLossModel(
        segments=(
            PathLossSegment(
                d_lo=0.0,
                d_hi=math.inf,
                a_los=a_los,
                alpha_los=alpha_los,
                a_nlos=a_nlos,
                alpha_nlos=alpha_nlos,
            ),
        )
    )


def linear_profile(d1: float = DEFAULT_LOS_CUTOFF_KM) -> LosProfile:
    return LosProfile.linear(d1)


def exponential_profile(R1: float = 0.156, R2: float = 0.03) -> LosProfile:
    return LosProfile.exponential(R1, R2)


def single_slope_profile() -> LosProfile:
    return LosProfile.single_slope()
