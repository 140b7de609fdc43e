"""Laplace transforms of the aggregate uplink interference.

For an uplink with fractional power control, the Laplace transform of the
interference seen by the station serving the typical user factorises into
exponential factors, one per interference-path type, of the form

    exp( -2 pi lam  int  w(x)  E(s, x)  x dx )

where ``w`` weights the path type at distance ``x`` and ``E`` is the
expectation, over the interferer's own serving distance ``R_z``, of the
coupling kernel

    K = 1 / (1 + zeta_path(x) / (s p0 beta(R_z)))
      = s p0 beta(R_z) / (s p0 beta(R_z) + zeta_path(x)),

with ``beta`` the interferer's power-control compensation (its serving
path loss to the power epsilon).  ``R_z`` follows the serving-distance law
truncated at the loss level of the interference path (unnormalised, see
:mod:`ulcov.distributions`).

Two implementations are provided:

* scalar reference operations (``expected_interference_coupling``,
  ``interference_laplace``) built directly on the adaptive integrator at
  the stated tolerances; these define the contract and are deliberately
  simple;
* batch engines used by the coverage integrals, which evaluate the same
  nested integrals on fixed dyadically-graded tensor-product grids.  The
  linear-profile engine exploits the power-law structure so that inner
  grids are reused across outer nodes; the generic engine makes no use of
  the linear case tables and serves both the no-LoS baseline and as a
  structurally independent cross-check.
"""

from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache

import numpy as np

from .distributions import (
    InterfererCase,
    InterfererCaseKind,
    _case_bounds,
    _serving_density,
    _void_fns,
)
from .errors import ConfigurationError, DomainError
from .pathloss import LinkType, LosProfile, PathLossModel, PowerControl
from .quadrature import integrate_adaptive, integrate_semi_infinite, unit_nodes

__all__ = [
    "ServingCase",
    "expected_interference_coupling",
    "interference_laplace",
    "linear_engine",
    "generic_engine",
]


def _density_cut(lam: float, support: float) -> float:
    """Distance beyond which every serving density underflows to zero.

    The NLoS void exponent dominates pi lam u^2 - pi lam support^2, so the
    density is below the double-precision floor past this radius; clipping
    integration bounds here is exact and keeps graded grids resolved.
    """
    return math.sqrt(745.0 / (math.pi * lam)) + support


class ServingCase(str, Enum):
    """Serving configuration of the typical link."""

    LOS_NEAR = "los_near"  # LoS link, within the LoS cutoff
    NLOS_NEAR = "nlos_near"  # NLoS link, within the cutoff
    NLOS_FAR = "nlos_far"  # NLoS link, beyond the cutoff

    @property
    def link(self) -> LinkType:
        return LinkType.LOS if self is ServingCase.LOS_NEAR else LinkType.NLOS


# Grid sizes for the batch engines (panels, Gauss-Legendre order).  The
# inner (u) grids grade dyadically toward 0 where the serving densities
# concentrate at high station density; the x grids grade toward the lower
# limit where the integrand peaks; the unbounded tails use a rational
# substitution graded at both ends.
_U_PANELS, _U_ORDER = 10, 6
_X_PANELS, _X_ORDER = 7, 6
_T_PANELS, _T_ORDER = 10, 6


def _require_linear_context(model: PathLossModel, profile: LosProfile) -> None:
    if profile.kind != "linear":
        raise ConfigurationError("the case-table path requires the linear LoS profile")
    if model.n_segments != 1:
        raise ConfigurationError("the case-table path requires a single-segment model")


# ---------------------------------------------------------------------------
# Scalar reference operations
# ---------------------------------------------------------------------------


def expected_interference_coupling(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    pc: PowerControl,
    s: float,
    x: float,
    path: LinkType,
    case: InterfererCaseKind | None = None,
    *,
    rel_tol: float = 1e-7,
) -> float:
    """Expectation of the coupling kernel over the interferer serving law.

    Value lies in [0, 1]; it is 0 at ``s = 0`` (the kernel vanishes) and
    increases with ``s``.  ``case`` may be supplied explicitly; otherwise it
    is inferred from the path type and ``x`` relative to the LoS cutoff.
    """
    _require_linear_context(model, profile)
    if s < 0.0:
        raise DomainError("s must be non-negative")
    if x <= 0.0:
        raise DomainError("x must be positive")
    d1 = profile.d1
    inferred = (
        InterfererCaseKind.LOS_NEAR
        if path is LinkType.LOS
        else (InterfererCaseKind.NLOS_NEAR if x <= d1 else InterfererCaseKind.NLOS_FAR)
    )
    if case is None:
        case = inferred
    elif case is not inferred:
        raise DomainError(f"case {case.value} inconsistent with path={path.value}, x={x}")
    if s == 0.0:
        return 0.0

    icase = InterfererCase(kind=case, x=x)
    icase.validate(d1)
    bound_los, bound_nlos = _case_bounds(model, profile, icase)
    bound_nlos = min(bound_nlos, _density_cut(lam, d1))
    zeta_x = float(model.attenuation(x, path))
    c = zeta_x / (s * pc.p0_mw)
    lam_los, lam_nlos = _void_fns(profile, lam, closed=True)
    y1 = float(model.equal_loss_distance(d1, LinkType.LOS))

    total = 0.0
    for link, bound in ((LinkType.LOS, bound_los), (LinkType.NLOS, bound_nlos)):
        alpha_eps = (
            model.segments[0].exponent(link) * pc.epsilon
        )
        a_eps = model.segments[0].intercept(link) ** pc.epsilon

        def integrand(u, link=link, alpha_eps=alpha_eps, a_eps=a_eps):
            beta = a_eps * u**alpha_eps
            dens = _serving_density(model, profile, lam, u, link, lam_los, lam_nlos)
            return dens * beta / (beta + c)

        # Split at interior kinks of the serving density.
        pts = sorted({p for p in (y1, d1) if 0.0 < p < bound} | {bound})
        lo = 0.0
        for hi in pts:
            total += integrate_adaptive(
                integrand, lo, hi, rel_tol=rel_tol, abs_tol=1e-300
            ).value
            lo = hi
    return total


def interference_laplace(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    pc: PowerControl,
    s: float,
    r: float,
    case: ServingCase,
    *,
    rel_tol: float = 1e-6,
    inner_rel_tol: float = 1e-7,
) -> float:
    """Laplace transform of the interference at ``s`` for a serving case.

    Reference implementation via nested adaptive quadrature; the exclusion
    radii follow from the smallest-path-loss association (no interfering
    station may offer the typical user a smaller loss than its serving
    link), and the path-type mix at distance ``x`` uses the LoS profile.
    """
    _require_linear_context(model, profile)
    if s < 0.0:
        raise DomainError("s must be non-negative")
    d1 = profile.d1
    if case in (ServingCase.LOS_NEAR, ServingCase.NLOS_NEAR):
        if not 0.0 < r <= d1:
            raise DomainError(f"{case.value} requires 0 < r <= {d1}, got {r}")
    else:
        if not r > d1:
            raise DomainError(f"{case.value} requires r > {d1}, got {r}")
    if s == 0.0:
        return 1.0

    def coupling(x_arr, path, kind):
        out = np.empty(np.shape(x_arr), dtype=float)
        flat = out.reshape(-1)
        for i, xi in enumerate(np.ravel(x_arr)):
            flat[i] = expected_interference_coupling(
                model, profile, lam, pc, s, float(xi), path, kind, rel_tol=inner_rel_tol
            )
        return out

    exponent = 0.0
    rho_los = r if case is ServingCase.LOS_NEAR else float(
        model.equal_loss_distance(r, LinkType.NLOS)
    )
    rho_nlos = r if case is not ServingCase.LOS_NEAR else float(
        model.equal_loss_distance(r, LinkType.LOS)
    )

    # LoS interference paths exist only inside the cutoff.
    if rho_los < d1:
        def f_los(x):
            w = 1.0 - x / d1
            return w * coupling(x, LinkType.LOS, InterfererCaseKind.LOS_NEAR) * x

        exponent += integrate_adaptive(f_los, rho_los, d1, rel_tol=rel_tol).value

    # NLoS interference paths, within and beyond the cutoff.
    if rho_nlos < d1:
        def f_nlos_near(x):
            return (x / d1) * coupling(x, LinkType.NLOS, InterfererCaseKind.NLOS_NEAR) * x

        exponent += integrate_adaptive(f_nlos_near, rho_nlos, d1, rel_tol=rel_tol).value

    tail_start = max(rho_nlos, d1)

    def f_nlos_far(x):
        return coupling(x, LinkType.NLOS, InterfererCaseKind.NLOS_FAR) * x

    exponent += integrate_semi_infinite(
        f_nlos_far,
        tail_start,
        rel_tol=rel_tol,
        scale=max(d1, 2.0 / math.sqrt(math.pi * lam)),
    ).value

    return math.exp(-2.0 * math.pi * lam * exponent)


# ---------------------------------------------------------------------------
# Batch engines
# ---------------------------------------------------------------------------


def _reduce(num: np.ndarray, beta: np.ndarray, c: np.ndarray) -> np.ndarray:
    """sum over the trailing axis of num / (beta + c[..., None])."""
    return (num / (beta + c[..., None])).sum(axis=-1)


class _LinearEngine:
    """Vectorised interference exponents for the linear-profile model.

    All inner integrals are parameterised on unit grids so that powers of
    the integration variable factor into precomputed node powers times
    bound powers; only the beyond-cutoff pieces need per-node powers.
    """

    def __init__(self, model: PathLossModel, profile: LosProfile, lam: float, pc: PowerControl):
        _require_linear_context(model, profile)
        seg = model.segments[0]
        self.model, self.profile, self.lam, self.pc = model, profile, lam, pc
        self.d1 = profile.d1
        self.AL, self.aL = seg.a_los, seg.alpha_los
        self.ANL, self.aNL = seg.a_nlos, seg.alpha_nlos
        self.p0 = pc.p0_mw
        self.eps = pc.epsilon
        self.pi_lam = math.pi * lam
        self.c3 = 2.0 * math.pi * lam / (3.0 * self.d1)
        self.two_pi_lam = 2.0 * math.pi * lam
        # Equal-loss maps r1(r) = kLN r^(aL/aNL), r2(r) = kNL r^(aNL/aL).
        self.eLN = self.aL / self.aNL
        self.kLN = (self.AL / self.ANL) ** (1.0 / self.aNL)
        self.eNL = self.aNL / self.aL
        self.kNL = (self.ANL / self.AL) ** (1.0 / self.aL)
        self.y1 = self.kLN * self.d1**self.eLN
        # Power-control constants.
        self.ALe = self.AL**self.eps
        self.ANLe = self.ANL**self.eps
        self.bL = self.aL * self.eps
        self.bNL = self.aNL * self.eps

        # Unit grids and precomputed node powers.
        eta, weta = unit_nodes(_U_PANELS, _U_ORDER, "left")
        self.eta, self.weta = eta, weta
        self.eta2 = eta**2
        self.eta3 = eta**3
        self.eta_r1c = eta ** (3.0 * self.eLN)
        self.eta_bL = eta**self.bL
        self.eta_r2s = eta ** (2.0 * self.eNL)
        self.eta_r2c = eta ** (3.0 * self.eNL)
        self.eta_bNL = eta**self.bNL
        self.xi, self.wxi = unit_nodes(_X_PANELS, _X_ORDER, "left")
        self.t_nodes, self.t_weights = unit_nodes(_T_PANELS, _T_ORDER, "both")
        self.tail_scale = max(self.d1, 2.0 / math.sqrt(self.pi_lam))

        # Fixed whole-cutoff pieces reused by every beyond-cutoff coupling,
        # stored as (num, beta, sign) addends.
        self._d1_pieces: list[tuple[np.ndarray, np.ndarray, float]] = []
        num, beta = self._los_piece(np.array(self.d1))
        self._d1_pieces.append((num, beta, 1.0))
        num, beta = self._nlos_branch2_piece(np.array(self.d1))
        self._d1_pieces.append((num, beta, 1.0))
        num, beta = self._nlos_branch2_piece(np.array(self.y1))
        self._d1_pieces.append((num, beta, -1.0))
        num, beta = self._nlos_branch1_piece(np.array(self.y1))
        self._d1_pieces.append((num, beta, 1.0))

        # Fixed tail nodes for the beyond-cutoff x integral from d1.
        x_t = self.d1 + self.tail_scale * self.t_nodes / (1.0 - self.t_nodes)
        w_t = self.t_weights * self.tail_scale / (1.0 - self.t_nodes) ** 2
        self.xt_d1, self.wxt_d1 = x_t, w_t
        self.zeta_xt_d1 = self.ANL * x_t**self.aNL
        num, beta = self._nlos_far_piece(x_t)
        self.num_far_d1, self.beta_far_d1 = num, beta

    # -- pieces ------------------------------------------------------------
    def _los_piece(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """LoS-serving piece over (0, b], b <= d1; returns (weight*density*beta, beta)."""
        b = np.asarray(b, dtype=float)
        bb = b[..., None]
        u = bb * self.eta
        expo = (
            -self.pi_lam * (b**2)[..., None] * self.eta2
            + self.c3 * (b**3)[..., None] * self.eta3
            - self.c3 * self.kLN**3 * (b ** (3.0 * self.eLN))[..., None] * self.eta_r1c
        )
        dens = np.exp(expo) * (1.0 - u / self.d1) * self.two_pi_lam * u
        beta = self.ALe * (b**self.bL)[..., None] * self.eta_bL
        num = dens * self.weta * bb * beta
        return num, beta

    def _nlos_branch1_piece(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """NLoS-serving piece over (0, b] with b <= y1 (equal-loss void active)."""
        b = np.asarray(b, dtype=float)
        bb = b[..., None]
        u = bb * self.eta
        r2sq = self.kNL**2 * (b ** (2.0 * self.eNL))[..., None] * self.eta_r2s
        r2cu = self.kNL**3 * (b ** (3.0 * self.eNL))[..., None] * self.eta_r2c
        expo = (
            -self.c3 * (b**3)[..., None] * self.eta3
            - self.pi_lam * r2sq
            + self.c3 * r2cu
        )
        dens = np.exp(expo) * (u / self.d1) * self.two_pi_lam * u
        beta = self.ANLe * (b**self.bNL)[..., None] * self.eta_bNL
        num = dens * self.weta * bb * beta
        return num, beta

    def _nlos_branch2_piece(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Integral of the saturated-void NLoS branch over (0, b], b <= d1.

        Only differences of this primitive are used, so integrating the
        branch-2 form from zero is exact and keeps bounds factorable.
        """
        b = np.asarray(b, dtype=float)
        bb = b[..., None]
        u = bb * self.eta
        expo = -self.c3 * (b**3)[..., None] * self.eta3 - self.pi_lam * self.d1**2 / 3.0
        dens = np.exp(expo) * (u / self.d1) * self.two_pi_lam * u
        beta = self.ANLe * (b**self.bNL)[..., None] * self.eta_bNL
        num = dens * self.weta * bb * beta
        return num, beta

    def _nlos_within_contrib(self, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Coupling contribution of NLoS-serving interferers within (0, b], b <= d1.

        The serving density changes branch at y1; the integral is assembled
        as branch2(0,b) - branch2(0, min(b,y1)) + branch1(0, min(b,y1)) so
        every tensor keeps a zero lower bound.
        """
        b = np.asarray(b, dtype=float)
        b_lo = np.minimum(b, self.y1)
        num, beta = self._nlos_branch2_piece(b)
        out = _reduce(num, beta, c)
        num, beta = self._nlos_branch2_piece(b_lo)
        out = out - _reduce(num, beta, c)
        num, beta = self._nlos_branch1_piece(b_lo)
        return out + _reduce(num, beta, c)

    def _nlos_far_piece(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """NLoS-serving piece over (d1, b], b > d1 (plain nearest-station law).

        Bounds are clipped where the density underflows so huge conditioning
        distances cannot outrun the graded grid.
        """
        b = np.minimum(np.asarray(b, dtype=float), _density_cut(self.lam, self.d1))
        span = (b - self.d1)[..., None]
        u = self.d1 + span * self.eta
        dens = np.exp(-self.pi_lam * u * u) * self.two_pi_lam * u
        beta = self.ANLe * u**self.bNL
        num = dens * self.weta * span * beta
        return num, beta

    # -- couplings ---------------------------------------------------------
    def _d1_contrib(self, c: np.ndarray) -> np.ndarray:
        out = 0.0
        for num, beta, sign in self._d1_pieces:
            out = out + sign * _reduce(num, beta, c)
        return out

    def coupling_los_path(self, x: np.ndarray, c: np.ndarray) -> np.ndarray:
        num, beta = self._los_piece(x)
        out = _reduce(num, beta, c)
        # NLoS-serving bound x1 never exceeds y1, so branch 1 suffices.
        num, beta = self._nlos_branch1_piece(self.kLN * x**self.eLN)
        return out + _reduce(num, beta, c)

    def coupling_nlos_near_path(self, x: np.ndarray, c: np.ndarray) -> np.ndarray:
        bound_l = np.minimum(self.kNL * x**self.eNL, self.d1)
        num, beta = self._los_piece(bound_l)
        out = _reduce(num, beta, c)
        return out + self._nlos_within_contrib(x, c)

    def coupling_nlos_far_path(self, x: np.ndarray, c: np.ndarray) -> np.ndarray:
        out = self._d1_contrib(c)
        num, beta = self._nlos_far_piece(x)
        return out + _reduce(num, beta, c)

    # -- exponent factors ----------------------------------------------------
    def _factor_los(self, lower: np.ndarray, inv_sp0: np.ndarray) -> np.ndarray:
        """int_lower^d1 (1 - x/d1) E_los(x) x dx, vanishing where lower >= d1."""
        span = np.maximum(self.d1 - lower, 0.0)
        x = lower[:, None] + span[:, None] * self.xi
        c = self.AL * x**self.aL * inv_sp0[:, None]
        e = self.coupling_los_path(x, c)
        integrand = (1.0 - x / self.d1) * e * x
        return (integrand * self.wxi).sum(axis=1) * span

    def _factor_nlos_near(self, lower: np.ndarray, inv_sp0: np.ndarray) -> np.ndarray:
        """int_lower^d1 (x/d1) E_nlos(x) x dx over the within-cutoff ring.

        The coupling has a derivative kink where the equal-loss distance
        reaches the cutoff (x = y1), so the range is integrated in two
        smooth blocks.
        """
        out = 0.0
        for lo_edge, hi_edge in ((0.0, self.y1), (self.y1, self.d1)):
            lo = np.clip(lower, lo_edge, hi_edge)
            span = hi_edge - lo
            x = lo[:, None] + span[:, None] * self.xi
            c = self.ANL * x**self.aNL * inv_sp0[:, None]
            e = self.coupling_nlos_near_path(x, c)
            integrand = (x / self.d1) * e * x
            out = out + (integrand * self.wxi).sum(axis=1) * span
        return out

    def _factor_tail_from_d1(self, inv_sp0: np.ndarray) -> np.ndarray:
        """int_d1^inf E_nlos(x) x dx on the shared transformed grid."""
        c = self.zeta_xt_d1[None, :] * inv_sp0[:, None]
        e = self._d1_contrib(c)
        e = e + _reduce(
            self.num_far_d1[None, :, :], self.beta_far_d1[None, :, :], c
        )
        return ((e * self.xt_d1) * self.wxt_d1).sum(axis=1)

    def _factor_tail_from_r(self, r: np.ndarray, inv_sp0: np.ndarray) -> np.ndarray:
        """int_r^inf E_nlos(x) x dx for serving distances beyond the cutoff."""
        x = r[:, None] + self.tail_scale * self.t_nodes / (1.0 - self.t_nodes)
        wx = self.tail_scale * self.t_weights / (1.0 - self.t_nodes) ** 2
        c = self.ANL * x**self.aNL * inv_sp0[:, None]
        e = self._d1_contrib(c)
        num, beta = self._nlos_far_piece(x)
        e = e + _reduce(num, beta, c)
        return (e * x * wx).sum(axis=1)

    # -- public batch API ----------------------------------------------------
    def laplace(self, case: ServingCase, s: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Laplace transform values for aligned arrays of (s, r)."""
        s = np.asarray(s, dtype=float)
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            inv_sp0 = 1.0 / (s * self.p0)
        if case is ServingCase.LOS_NEAR:
            g = self._factor_los(r, inv_sp0)
            g = g + self._factor_nlos_near(self.kLN * r**self.eLN, inv_sp0)
            g = g + self._factor_tail_from_d1(inv_sp0)
        elif case is ServingCase.NLOS_NEAR:
            lower_los = np.minimum(self.kNL * r**self.eNL, self.d1)
            g = self._factor_los(lower_los, inv_sp0)
            g = g + self._factor_nlos_near(r, inv_sp0)
            g = g + self._factor_tail_from_d1(inv_sp0)
        elif case is ServingCase.NLOS_FAR:
            g = self._factor_tail_from_r(r, inv_sp0)
        else:  # pragma: no cover
            raise ConfigurationError(f"unknown serving case {case!r}")
        return np.exp(-self.two_pi_lam * g)


class _GenericEngine:
    """Interference exponents assembled without the linear case tables.

    Exclusion radii and truncation bounds come from the equal-loss maps and
    the path mix from the profile, so this engine covers the no-LoS
    baseline and doubles as an independent check of the linear machinery.
    Profiles must admit closed void exponents (linear or single-slope);
    models must be single-segment.
    """

    def __init__(self, model: PathLossModel, profile: LosProfile, lam: float, pc: PowerControl):
        if model.n_segments != 1:
            raise ConfigurationError("generic engine supports single-segment models")
        if profile.kind not in ("linear", "single_slope"):
            raise ConfigurationError(
                "analytic evaluation supports the linear and single-slope profiles; "
                "use the Monte Carlo engine for other LoS models"
            )
        self.model, self.profile, self.lam, self.pc = model, profile, lam, pc
        seg = model.segments[0]
        self.seg = seg
        self.p0 = pc.p0_mw
        self.eps = pc.epsilon
        self.two_pi_lam = 2.0 * math.pi * lam
        self.lam_los, self.lam_nlos = _void_fns(profile, lam, closed=True)
        self.support = profile.support_radius()
        self.eta, self.weta = unit_nodes(_U_PANELS, _U_ORDER, "left")
        self.xi, self.wxi = unit_nodes(_X_PANELS, _X_ORDER, "left")
        self.t_nodes, self.t_weights = unit_nodes(_T_PANELS, _T_ORDER, "both")
        self.tail_scale = max(self.support, 2.0 / math.sqrt(math.pi * lam), 1e-3)
        # The couplings kink where an equal-loss map crosses a profile
        # breakpoint; split both the u and x integrations there.
        kink_candidates = set(profile.breakpoints)
        for bp in profile.breakpoints:
            kink_candidates.add(float(model.equal_loss_distance(bp, LinkType.LOS)))
        self.breaks = sorted(b for b in kink_candidates if 0.0 < b < math.inf)
        self.u_kinks = {
            LinkType.LOS: (),
            LinkType.NLOS: tuple(self.breaks),
        }

    def _density(self, u: np.ndarray, link: LinkType) -> np.ndarray:
        return _serving_density(
            self.model, self.profile, self.lam, u, link, self.lam_los, self.lam_nlos
        )

    def _beta(self, u: np.ndarray, link: LinkType) -> np.ndarray:
        a = self.seg.intercept(link) ** self.eps
        return a * u ** (self.seg.exponent(link) * self.eps)

    def _coupling(self, x: np.ndarray, path: LinkType, c: np.ndarray) -> np.ndarray:
        """E over the truncated serving law, pieces assembled from bounds."""
        out = np.zeros(np.shape(x), dtype=float)
        cross = np.asarray(self.model.equal_loss_distance(x, path), dtype=float)
        cut = _density_cut(self.lam, self.support)
        for link in (LinkType.LOS, LinkType.NLOS):
            if link is LinkType.LOS and self.profile.kind == "single_slope":
                continue
            bound = np.asarray(x, dtype=float) if link is path else cross
            if link is LinkType.LOS:
                bound = np.minimum(bound, self.support)
            bound = np.minimum(np.asarray(bound, dtype=float), cut)
            edges = [k for k in self.u_kinks[link] if k < cut] + [cut]
            lo_edge = 0.0
            for hi_edge in edges:
                hi = np.clip(bound, lo_edge, hi_edge)
                span = (hi - lo_edge)[..., None]
                u = np.maximum(lo_edge + span * self.eta, 1e-300)
                dens = self._density(u, link)
                beta = self._beta(u, link)
                num = dens * beta * self.weta * span
                out = out + _reduce(num, beta, c)
                lo_edge = hi_edge
        return out

    def _x_integral_finite(
        self,
        lower: np.ndarray,
        upper: float,
        path: LinkType,
        inv_sp0: np.ndarray,
    ) -> np.ndarray:
        span = np.maximum(upper - lower, 0.0)
        x = lower[:, None] + span[:, None] * self.xi
        zeta = np.asarray(self.model.attenuation(x, path), dtype=float)
        c = zeta * inv_sp0[:, None]
        prl = np.asarray(self.profile.los_probability(np.maximum(x, 1e-300)), dtype=float)
        w = prl if path is LinkType.LOS else 1.0 - prl
        e = self._coupling(x, path, c)
        return (w * e * x * self.wxi).sum(axis=1) * span

    def _x_integral_tail(
        self, lower: np.ndarray, path: LinkType, inv_sp0: np.ndarray
    ) -> np.ndarray:
        x = lower[:, None] + self.tail_scale * self.t_nodes / (1.0 - self.t_nodes)
        wx = self.tail_scale * self.t_weights / (1.0 - self.t_nodes) ** 2
        zeta = np.asarray(self.model.attenuation(x, path), dtype=float)
        c = zeta * inv_sp0[:, None]
        prl = np.asarray(self.profile.los_probability(x), dtype=float)
        w = prl if path is LinkType.LOS else 1.0 - prl
        e = self._coupling(x, path, c)
        return (w * e * x * wx).sum(axis=1)

    def laplace(self, serving_link: LinkType, s: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Laplace transform for serving link type at distances ``r``.

        The serving case (near/far) is implicit in ``r``; exclusion radii
        are ``r`` for same-type interferers and the equal-loss distance for
        the opposite type.
        """
        s = np.asarray(s, dtype=float)
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            inv_sp0 = 1.0 / (s * self.p0)
        cross = np.asarray(self.model.equal_loss_distance(r, serving_link), dtype=float)
        g = np.zeros(r.shape, dtype=float)
        for path in (LinkType.LOS, LinkType.NLOS):
            lower = r if path is serving_link else cross
            if path is LinkType.LOS:
                if self.support <= 0.0:
                    continue
                # Split at profile breakpoints, stop at the LoS support edge.
                edges = [b for b in self.breaks if b < self.support] + [self.support]
                lo = np.minimum(lower, self.support)
                for hi in edges:
                    seg_lo = np.minimum(lo, hi)
                    g = g + self._x_integral_finite(seg_lo, hi, path, inv_sp0)
                    lo = np.maximum(lo, hi)
            else:
                lo = lower
                for hi in self.breaks:
                    seg_lo = np.minimum(lo, hi)
                    g = g + self._x_integral_finite(seg_lo, hi, path, inv_sp0)
                    lo = np.maximum(lo, hi)
                g = g + self._x_integral_tail(lo, path, inv_sp0)
        return np.exp(-self.two_pi_lam * g)


@lru_cache(maxsize=64)
def linear_engine(
    model: PathLossModel, profile: LosProfile, lam: float, pc: PowerControl
) -> _LinearEngine:
    return _LinearEngine(model, profile, lam, pc)


@lru_cache(maxsize=64)
def generic_engine(
    model: PathLossModel, profile: LosProfile, lam: float, pc: PowerControl
) -> _GenericEngine:
    return _GenericEngine(model, profile, lam, pc)
