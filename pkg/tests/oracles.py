"""Brute-force reference samplers used as independent oracles in tests.

These deliberately share no code with the analytical machinery: serving
distances come from direct realisations of the marked station process
around a probe user, and Laplace transforms from averaged per-station
factor products over realised interferer fields.
"""

from __future__ import annotations

import math

import numpy as np

from ulcov.interference import ServingCase, linear_engine
from ulcov.pathloss import LinkType, LosProfile, PathLossModel, PowerControl


def serving_pool(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    n: int,
    seed: int,
    chunk: int = 20000,
) -> tuple[np.ndarray, np.ndarray]:
    """i.i.d. samples of (serving distance, serving-link-is-LoS).

    Realises the station process in a disc wide enough that the winner is
    inside with probability 1 - exp(-21), marks each link once, and takes
    the smallest loss.
    """
    rng = np.random.default_rng(seed)
    radius = max(math.sqrt(21.0 / (math.pi * lam)), profile.support_radius() * 1.0 + 1e-9)
    mean_count = lam * math.pi * radius**2
    seg = model.segments[0]

    out_d = np.empty(n)
    out_los = np.empty(n, dtype=bool)
    done = 0
    while done < n:
        m = min(chunk, n - done)
        counts = rng.poisson(mean_count, m)
        counts = np.maximum(counts, 1)
        width = int(counts.max())
        r = np.maximum(radius * np.sqrt(rng.random((m, width))), 1e-12)
        valid = np.arange(width)[None, :] < counts[:, None]
        prl = np.zeros((m, width))
        inside = valid & (r < max(profile.support_radius(), 1e-12))
        if np.any(inside):
            prl[inside] = profile.los_probability(r[inside])
        los = rng.random((m, width)) < prl
        pl = seg.a_nlos * r**seg.alpha_nlos
        pl[los] = seg.a_los * r[los] ** seg.alpha_los
        pl[~valid] = np.inf
        j = np.argmin(pl, axis=1)
        rows = np.arange(m)
        out_d[done : done + m] = r[rows, j]
        out_los[done : done + m] = los[rows, j]
        done += m
    return out_d, out_los


def pool_loss(model: PathLossModel, d: np.ndarray, los: np.ndarray) -> np.ndarray:
    seg = model.segments[0]
    pl = seg.a_nlos * d**seg.alpha_nlos
    pl[los] = seg.a_los * d[los] ** seg.alpha_los
    return pl


def coupling_mc(
    model: PathLossModel,
    pc: PowerControl,
    s: float,
    x: float,
    path: LinkType,
    pool_d: np.ndarray,
    pool_los: np.ndarray,
) -> tuple[float, float]:
    """Mean and standard error of K * 1{interferer loss <= link loss}.

    K = s p0 beta / (s p0 beta + zeta_path(x)) with beta the pool sample's
    serving loss to the power epsilon; samples violating the loss bound
    contribute zero, matching the unnormalised truncated law.
    """
    zeta_x = float(model.attenuation(x, path))
    pl = pool_loss(model, pool_d, pool_los)
    beta = pl**pc.epsilon
    k = s * pc.p0_mw * beta / (s * pc.p0_mw * beta + zeta_x)
    k = np.where(pl <= zeta_x, k, 0.0)
    return float(np.mean(k)), float(np.std(k) / math.sqrt(k.size))


def laplace_windowed_mc(
    model: PathLossModel,
    profile: LosProfile,
    lam: float,
    pc: PowerControl,
    s: float,
    r: float,
    case: ServingCase,
    n_real: int,
    seed: int,
    pool: tuple[np.ndarray, np.ndarray],
    window: float | None = None,
    engine: str = "linear",
) -> tuple[float, float, float]:
    """(MC estimate, its SE, analytic counterpart) of the windowed Laplace.

    Interfering stations are realised inside a disc of radius ``window``;
    each surviving station contributes the fading-averaged factor
    1/(1 + s p0 beta / zeta) with its user's serving state drawn from the
    pool, or factor one when that state violates the loss bound.  The
    analytic counterpart divides out the beyond-window tail, which has the
    same form for every serving case.
    """
    d1 = profile.d1
    if window is None:
        window = max(r, d1) + 8.0 / math.sqrt(lam)
    rng = np.random.default_rng(seed)
    pool_d, pool_los = pool
    pool_pl = pool_loss(model, pool_d, pool_los)
    pool_beta = pool_pl**pc.epsilon

    if case is ServingCase.LOS_NEAR:
        excl_los = r
        excl_nlos = float(model.equal_loss_distance(r, LinkType.LOS))
    else:
        excl_los = float(model.equal_loss_distance(r, LinkType.NLOS))
        excl_nlos = r
    seg = model.segments[0]

    mean_count = lam * math.pi * window**2
    factors = np.empty(n_real)
    for i in range(n_real):
        m = max(rng.poisson(mean_count), 0)
        if m == 0:
            factors[i] = 1.0
            continue
        x = window * np.sqrt(rng.random(m))
        prl = np.asarray(profile.los_probability(np.maximum(x, 1e-12)), dtype=float)
        is_los = rng.random(m) < prl
        keep = np.where(is_los, x >= excl_los, x >= excl_nlos)
        x = x[keep]
        is_los = is_los[keep]
        if x.size == 0:
            factors[i] = 1.0
            continue
        zeta = np.where(
            is_los, seg.a_los * x**seg.alpha_los, seg.a_nlos * x**seg.alpha_nlos
        )
        draw = rng.integers(0, pool_d.size, x.size)
        bound_ok = pool_pl[draw] <= zeta
        f = 1.0 / (1.0 + s * pc.p0_mw * pool_beta[draw] / zeta)
        f = np.where(bound_ok, f, 1.0)
        factors[i] = float(np.prod(f))
    est = float(np.mean(factors))
    se = float(np.std(factors) / math.sqrt(n_real))

    if engine == "linear":
        eng = linear_engine(model, profile, lam, pc)
        l_case = float(eng.laplace(case, np.array([s]), np.array([r]))[0])
        l_tail = float(
            eng.laplace(ServingCase.NLOS_FAR, np.array([s]), np.array([window]))[0]
        )
    else:
        from ulcov.interference import generic_engine

        gen = generic_engine(model, profile, lam, pc)
        l_case = float(gen.laplace(case.link, np.array([s]), np.array([r]))[0])
        l_tail = float(
            gen.laplace(LinkType.NLOS, np.array([s]), np.array([window]))[0]
        )
    return est, se, l_case / l_tail
