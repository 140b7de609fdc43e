"""Serving-distance distributions for the typical user and for interferers.

The central objects are two "void exponents",

    lam_los(t)  = int_0^t  Pr_los(u)      2 pi lam u du
    lam_nlos(t) = int_0^t (1 - Pr_los(u)) 2 pi lam u du,

the expected counts of LoS-reachable / NLoS-reachable base stations whose
link would beat a given loss level.  The serving-distance density of a user
that attaches to the smallest-path-loss station factorises through them:

    f_los(r)  = exp(-lam_los(r) - lam_nlos(b1(r))) *      Pr_los(r) * 2 pi lam r
    f_nlos(r) = exp(-lam_nlos(r) - lam_los(b2(r))) * (1 - Pr_los(r)) * 2 pi lam r

where b1/b2 map a distance to the equal-loss distance of the opposite link
type.  The "generic" evaluator computes the void exponents by adaptive
quadrature for arbitrary profiles; the closed-form evaluator uses the
polynomial antiderivatives available for the linear profile (and the
trivial ones for the no-LoS baseline) and is preferred for speed.

Interferer serving distances follow the same laws truncated at the loss
level of the interference path; the truncated densities are deliberately
left unnormalised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DomainError
from .pathloss import LinkType, LosProfile, PathLossModel
from .quadrature import integrate_adaptive, integrate_semi_infinite

__all__ = [
    "ServingComponent",
    "InterfererCaseKind",
    "InterfererCase",
    "segment_edges",
    "los_void_exponent",
    "nlos_void_exponent",
    "serving_pdf_generic",
    "serving_pdf_3gpp",
    "serving_normalization",
    "interferer_pdf",
    "interferer_case_mass",
]


@dataclass(frozen=True)
class ServingComponent:
    """One (link type, segment) piece of the serving-distance density."""

    link: LinkType
    segment: int  # 1-based index into the merged segment partition

    def __post_init__(self):
        if self.segment < 1:
            raise ConfigurationError("segment index is 1-based")


class InterfererCaseKind(str, Enum):
    """Serving condition of the station receiving the interference.

    LOS_NEAR:  interference path is LoS (necessarily within the cutoff).
    NLOS_NEAR: interference path is NLoS at distance within the cutoff.
    NLOS_FAR:  interference path is NLoS beyond the cutoff.
    """

    LOS_NEAR = "los_near"
    NLOS_NEAR = "nlos_near"
    NLOS_FAR = "nlos_far"

    @property
    def path(self) -> LinkType:
        return LinkType.LOS if self is InterfererCaseKind.LOS_NEAR else LinkType.NLOS


@dataclass(frozen=True)
class InterfererCase:
    kind: InterfererCaseKind
    x: float  # distance (km) of the interference path being conditioned on

    def validate(self, cutoff: float) -> None:
        if self.x <= 0.0:
            raise DomainError("conditioning distance x must be positive")
        near = self.kind in (InterfererCaseKind.LOS_NEAR, InterfererCaseKind.NLOS_NEAR)
        if near and self.x > cutoff:
            raise DomainError(f"{self.kind.value} requires x <= {cutoff}, got {self.x}")
        if not near and self.x <= cutoff:
            raise DomainError(f"{self.kind.value} requires x > {cutoff}, got {self.x}")


def segment_edges(model: PathLossModel, profile: LosProfile) -> tuple[float, ...]:
    """Merged partition of (0, inf) from model segments and profile branches."""
    pts = set(model.boundaries) | set(profile.breakpoints)
    return (0.0, *sorted(pts), math.inf)


# ---------------------------------------------------------------------------
# Void exponents
# ---------------------------------------------------------------------------


def _closed_los_void(profile: LosProfile, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    if profile.kind == "single_slope":
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    if profile.kind == "linear":
        d1 = profile.d1
        c3 = 2.0 * math.pi * lam / (3.0 * d1)
        cap = math.pi * lam * d1**2 / 3.0

        def f(t):
            t = np.asarray(t, dtype=float)
            tc = np.minimum(t, d1)
            return np.where(t <= d1, math.pi * lam * tc * tc - c3 * tc**3, cap)

        return f
    raise ConfigurationError(f"no closed void exponent for profile {profile.kind!r}")


def _numeric_los_void(profile: LosProfile, lam: float) -> Callable[[np.ndarray], np.ndarray]:
    support = profile.support_radius()
    breaks = tuple(b for b in profile.breakpoints if b < support)

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape, dtype=float)
        flat = out.reshape(-1)
        for i, ti in enumerate(t.reshape(-1)):
            upper = min(ti, support) if support > 0.0 else 0.0
            if upper <= 0.0:
                flat[i] = 0.0
                continue
            # Integrate piecewise so profile discontinuities never sit
            # inside a panel (they stall the error allocator otherwise).
            edges = [0.0, *(b for b in breaks if b < upper), upper]
            acc = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                acc += integrate_adaptive(
                    lambda u: profile.los_probability(u) * 2.0 * math.pi * lam * u,
                    lo,
                    hi,
                    rel_tol=1e-8,
                    abs_tol=1e-300,
                ).value
            flat[i] = acc
        return out

    return f


def _void_fns(
    profile: LosProfile, lam: float, closed: bool
) -> tuple[Callable, Callable]:
    """(lam_los, lam_nlos) callables; nlos derives from the total pi*lam*t^2."""
    if closed:
        lam_los = _closed_los_void(profile, lam)
    else:
        lam_los = _numeric_los_void(profile, lam)

    def lam_nlos(t):
        t = np.asarray(t, dtype=float)
        return math.pi * lam * t * t - lam_los(t)

    return lam_los, lam_nlos


def los_void_exponent(profile: LosProfile, lam: float, t, *, closed: bool = True):
    """Expected LoS-linked station count within distance ``t``."""
    use_closed = closed and profile.kind in ("linear", "single_slope")
    fn = _void_fns(profile, lam, use_closed)[0]
    out = fn(np.asarray(t, dtype=float))
    return float(out) if np.ndim(t) == 0 else out


def nlos_void_exponent(profile: LosProfile, lam: float, t, *, closed: bool = True):
    use_closed = closed and profile.kind in ("linear", "single_slope")
    fn = _void_fns(profile, lam, use_closed)[1]
    out = fn(np.asarray(t, dtype=float))
    return float(out) if np.ndim(t) == 0 else out


# ---------------------------------------------------------------------------
# Serving-distance density
# ---------------------------------------------------------------------------


def _serving_density(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    r: np.ndarray,
    link: LinkType,
    lam_los: Callable,
    lam_nlos: Callable,
) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    prl = np.asarray(profile.los_probability(r), dtype=float)
    weight = prl if link is LinkType.LOS else 1.0 - prl
    cross = np.asarray(model.equal_loss_distance(r, link), dtype=float)
    if link is LinkType.LOS:
        expo = lam_los(r) + lam_nlos(cross)
    else:
        expo = lam_nlos(r) + lam_los(cross)
    return np.exp(-expo) * weight * 2.0 * math.pi * lam * r


def _component_window(
    model: PathLossModel, profile: LosProfile, component: ServingComponent | None, r: np.ndarray
) -> np.ndarray:
    if component is None:
        return np.ones(r.shape, dtype=bool)
    edges = segment_edges(model, profile)
    if component.segment >= len(edges):
        raise ConfigurationError(
            f"segment {component.segment} out of range for {len(edges) - 1} segments"
        )
    lo = edges[component.segment - 1]
    hi = edges[component.segment]
    return (r > lo) & (r <= hi)


def _serving_pdf(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    r,
    component: ServingComponent | None,
    closed: bool,
):
    if lam <= 0.0:
        raise DomainError("station density lam must be positive")
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("distance must be positive (km)")
    lam_los, lam_nlos = _void_fns(profile, lam, closed)
    if component is None:
        out = _serving_density(model, profile, lam, arr, LinkType.LOS, lam_los, lam_nlos)
        out = out + _serving_density(model, profile, lam, arr, LinkType.NLOS, lam_los, lam_nlos)
    else:
        out = _serving_density(model, profile, lam, arr, component.link, lam_los, lam_nlos)
        out = np.where(_component_window(model, profile, component, arr), out, 0.0)
    return float(out) if np.ndim(r) == 0 else out


def serving_pdf_generic(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    r,
    component: ServingComponent | None = None,
):
    """Serving-distance density via adaptive quadrature of the void exponents.

    Works for any profile; component ``None`` returns the LoS+NLoS total.
    """
    return _serving_pdf(model, profile, lam, r, component, closed=False)


def serving_pdf_3gpp(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    r,
    component: ServingComponent | None = None,
):
    """Closed-form serving-distance density for the linear-profile model."""
    if profile.kind != "linear":
        raise ConfigurationError(
            f"closed-form serving pdf requires the linear profile, got {profile.kind!r}"
        )
    return _serving_pdf(model, profile, lam, r, component, closed=True)


def serving_pdf(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    r,
    component: ServingComponent | None = None,
):
    """Closed form when available for the profile, generic otherwise."""
    closed = profile.kind in ("linear", "single_slope")
    return _serving_pdf(model, profile, lam, r, component, closed=closed)


def serving_normalization(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    *,
    generic: bool = True,
    rel_tol: float = 1e-7,
) -> float:
    """Integral of the total serving density over (0, inf); should be 1."""
    closed = (not generic) and profile.kind in ("linear", "single_slope")

    def integrand(r):
        return _serving_pdf(model, profile, lam, r, None, closed=closed)

    # Integrate piecewise over the merged segments so branch kinks never sit
    # inside a panel, then transform the unbounded tail.
    edges = segment_edges(model, profile)
    total = 0.0
    scale = max(1.0 / math.sqrt(lam), 0.05)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(hi):
            total += integrate_semi_infinite(
                integrand, lo, rel_tol=rel_tol, scale=scale
            ).value
        else:
            total += integrate_adaptive(integrand, lo, hi, rel_tol=rel_tol).value
    return total


# ---------------------------------------------------------------------------
# Interferer serving-distance density
# ---------------------------------------------------------------------------


def _case_bounds(
    model: PathLossModel, profile: LosProfile, case: InterfererCase
) -> tuple[float, float]:
    """Truncation bounds (LoS-serving, NLoS-serving) for a case."""
    path = case.kind.path
    bound_same = case.x
    bound_other = float(model.equal_loss_distance(case.x, path))
    if path is LinkType.LOS:
        return bound_same, bound_other
    return bound_other, bound_same


def interferer_pdf(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    case: InterfererCase,
    u,
    serving: LinkType | None = None,
):
    """Density of an interferer's serving distance, truncated by its case.

    The truncation keeps only serving configurations whose path loss does
    not exceed the loss of the interference path; no renormalisation is
    applied.  ``serving`` selects one serving-type piece, ``None`` sums both.
    """
    if profile.kind != "linear":
        raise ConfigurationError("interferer case tables are defined for the linear profile")
    case.validate(profile.d1)
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("distance must be positive (km)")
    lam_los, lam_nlos = _void_fns(profile, lam, closed=True)
    bound_los, bound_nlos = _case_bounds(model, profile, case)

    def piece(link: LinkType, bound: float) -> np.ndarray:
        dens = _serving_density(model, profile, lam, arr, link, lam_los, lam_nlos)
        return np.where(arr <= bound, dens, 0.0)

    if serving is LinkType.LOS:
        out = piece(LinkType.LOS, bound_los)
    elif serving is LinkType.NLOS:
        out = piece(LinkType.NLOS, bound_nlos)
    else:
        out = piece(LinkType.LOS, bound_los) + piece(LinkType.NLOS, bound_nlos)
    return float(out) if np.ndim(u) == 0 else out


def interferer_case_mass(
    model: PathLossModel, profile: LosProfile, lam: float, case: InterfererCase
) -> float:
    """Total mass of the (unnormalised) case density.

    Equals the probability that some station offers a path loss at most the
    interference-path loss, i.e. 1 - exp(-lam_los(b_L) - lam_nlos(b_NL)).
    """
    case.validate(profile.d1)
    lam_los, lam_nlos = _void_fns(profile, lam, closed=True)
    bound_los, bound_nlos = _case_bounds(model, profile, case)
    return 1.0 - math.exp(-float(lam_los(bound_los)) - float(lam_nlos(bound_nlos)))
