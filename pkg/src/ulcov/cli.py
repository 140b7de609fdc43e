"""Configuration, sweeps, figure recipes, and CSV output.

This is the only module that speaks dB/dBm; everything below it works in
linear units.  Configuration is a flat ``key = value`` text file whose
entries can be overridden by command-line flags of the same names.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .coverage import ase as analytic_ase
from .coverage import coverage_probability
from .errors import ConfigurationError
from .montecarlo import (
    FadingModel,
    NetworkScenario,
    empirical_ase,
    empirical_ccdf,
    simulate_sinr,
)
from .pathloss import LosProfile, PowerControl, three_gpp_path_loss

__all__ = [
    "RunConfig",
    "load_config",
    "scenario_from_config",
    "run_sweep",
    "reproduce_figure",
    "main",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_mw",
    "mw_to_dbm",
]

CSV_COLUMNS = (
    "lambda_bs_per_km2",
    "threshold_db",
    "epsilon",
    "pcov_analytic",
    "pcov_mc",
    "mc_ci_halfwidth",
    "ase_analytic",
    "ase_mc",
)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_mw(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(x_mw: float) -> float:
    return 10.0 * math.log10(x_mw)


# Default noise: thermal density -174 dBm/Hz plus the 5 dB receiver noise
# figure over one 180 kHz resource block, matching the per-block baseline
# transmit power.  (The wideband figure -99 dBm pairs with a 10 MHz band
# and mutes the interference dynamics the densification study is about.)
DEFAULT_NOISE_DBM = -116.4

_DEFAULTS: dict[str, object] = {
    "mode": "both",
    "sweep": "threshold_db",
    "quantities": "pcov",
    "lambda": 10.0,
    "epsilon": 0.7,
    "threshold_db": 0.0,
    "threshold_db_grid": "-10:20:2",
    "lambda_grid": "0:3.5:10",
    "p0_dbm": -76.0,
    "noise_dbm": DEFAULT_NOISE_DBM,
    "d1_km": 0.3,
    "alpha_los": 2.09,
    "alpha_nlos": 3.75,
    "intercept_los_db": 103.8,
    "intercept_nlos_db": 145.4,
    "exp_r1_km": 0.156,
    "exp_r2_km": 0.03,
    "profile": "linear",
    "fading": "rayleigh",
    "ricean_k_db": 15.0,
    "ue_density_ratio": 100.0,
    "drops": 10000,
    "seed": 12345,
    "workers": None,
    "out": None,
}

_FLOAT_KEYS = {
    "lambda",
    "epsilon",
    "threshold_db",
    "p0_dbm",
    "noise_dbm",
    "d1_km",
    "alpha_los",
    "alpha_nlos",
    "intercept_los_db",
    "intercept_nlos_db",
    "exp_r1_km",
    "exp_r2_km",
    "ricean_k_db",
    "ue_density_ratio",
}
_INT_KEYS = {"drops", "seed", "workers"}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    sweep: str
    quantities: tuple[str, ...]
    lam: float
    epsilon: float
    threshold_db: float
    threshold_db_grid: tuple[float, ...]
    lambda_grid: tuple[float, ...]
    p0_dbm: float
    noise_dbm: float
    d1_km: float
    alpha_los: float
    alpha_nlos: float
    intercept_los_db: float
    intercept_nlos_db: float
    exp_r1_km: float
    exp_r2_km: float
    profile: str
    fading: str
    ricean_k_db: float
    ue_density_ratio: float
    drops: int
    seed: int
    workers: int | None
    out: str | None


def _parse_threshold_grid(spec: str) -> tuple[float, ...]:
    try:
        start, stop, step = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise ConfigurationError(
            f"threshold_db_grid: expected 'start:stop:step' in dB, got {spec!r}"
        ) from exc
    if step <= 0 or stop < start:
        raise ConfigurationError("threshold_db_grid: require start <= stop and step > 0")
    n = int(round((stop - start) / step))
    return tuple(start + i * step for i in range(n + 1))


def _parse_lambda_grid(spec: str) -> tuple[float, ...]:
    try:
        lo, hi, per_decade = (float(tok) for tok in spec.split(":"))
    except ValueError as exc:
        raise ConfigurationError(
            f"lambda_grid: expected 'log10lo:log10hi:points_per_decade', got {spec!r}"
        ) from exc
    if per_decade <= 0 or hi < lo:
        raise ConfigurationError("lambda_grid: require log10lo <= log10hi and points_per_decade > 0")
    n = int(round((hi - lo) * per_decade))
    return tuple(10.0 ** (lo + i / per_decade) for i in range(n + 1))


def _coerce(key: str, raw: object):
    if isinstance(raw, str):
        raw = raw.strip()
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{key}: expected a number, got {raw!r}") from exc
    if key in _INT_KEYS:
        if raw is None or raw == "":
            return None
        try:
            return int(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"{key}: expected an integer, got {raw!r}") from exc
    return raw


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Resolve a configuration from defaults, an optional file, and overrides.

    Unknown keys and out-of-range values raise :class:`ConfigurationError`
    naming the offending key.
    """
    values = dict(_DEFAULTS)
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in values:
                raise ConfigurationError(f"{key}: unknown configuration key")
            values[key] = _coerce(key, raw)
    for key, raw in (overrides or {}).items():
        if key not in values:
            raise ConfigurationError(f"{key}: unknown configuration key")
        if raw is not None:
            values[key] = _coerce(key, raw)

    mode = values["mode"]
    if mode not in ("analytic", "montecarlo", "both"):
        raise ConfigurationError(f"mode: must be analytic, montecarlo, or both, got {mode!r}")
    sweep = values["sweep"]
    if sweep not in ("threshold_db", "lambda"):
        raise ConfigurationError(f"sweep: must be threshold_db or lambda, got {sweep!r}")
    quantities = tuple(q.strip() for q in str(values["quantities"]).split(",") if q.strip())
    for q in quantities:
        if q not in ("pcov", "ase"):
            raise ConfigurationError(f"quantities: must list pcov and/or ase, got {q!r}")
    profile = values["profile"]
    if profile not in ("linear", "exponential", "single-slope"):
        raise ConfigurationError(
            f"profile: must be linear, exponential, or single-slope, got {profile!r}"
        )
    fading = values["fading"]
    if fading not in ("rayleigh", "ricean"):
        raise ConfigurationError(f"fading: must be rayleigh or ricean, got {fading!r}")

    lam = float(values["lambda"])
    if lam <= 0:
        raise ConfigurationError(f"lambda: must be positive (BSs/km^2), got {lam}")
    epsilon = float(values["epsilon"])
    if not 0.0 < epsilon <= 1.0:
        raise ConfigurationError(f"epsilon: must lie in (0, 1], got {epsilon}")
    if float(values["d1_km"]) <= 0:
        raise ConfigurationError("d1_km: must be positive")
    if float(values["ue_density_ratio"]) < 10:
        raise ConfigurationError("ue_density_ratio: must be >= 10")
    drops = int(values["drops"])
    if drops < 1:
        raise ConfigurationError(f"drops: must be >= 1, got {drops}")
    if not math.isfinite(float(values["ricean_k_db"])):
        raise ConfigurationError("ricean_k_db: must be finite (dB)")

    cfg = RunConfig(
        mode=mode,
        sweep=sweep,
        quantities=quantities,
        lam=lam,
        epsilon=epsilon,
        threshold_db=float(values["threshold_db"]),
        threshold_db_grid=_parse_threshold_grid(str(values["threshold_db_grid"])),
        lambda_grid=_parse_lambda_grid(str(values["lambda_grid"])),
        p0_dbm=float(values["p0_dbm"]),
        noise_dbm=float(values["noise_dbm"]),
        d1_km=float(values["d1_km"]),
        alpha_los=float(values["alpha_los"]),
        alpha_nlos=float(values["alpha_nlos"]),
        intercept_los_db=float(values["intercept_los_db"]),
        intercept_nlos_db=float(values["intercept_nlos_db"]),
        exp_r1_km=float(values["exp_r1_km"]),
        exp_r2_km=float(values["exp_r2_km"]),
        profile=profile,
        fading=fading,
        ricean_k_db=float(values["ricean_k_db"]),
        ue_density_ratio=float(values["ue_density_ratio"]),
        drops=drops,
        seed=int(values["seed"]),
        workers=values["workers"] if values["workers"] is None else int(values["workers"]),
        out=values["out"],
    )
    _validate_mode(cfg)
    return cfg


def _validate_mode(cfg: RunConfig) -> None:
    wants_analytic = cfg.mode in ("analytic", "both")
    if wants_analytic and cfg.profile == "exponential":
        raise ConfigurationError(
            "mode: analytic evaluation is not available for the exponential "
            "LoS profile; use mode = montecarlo"
        )
    if wants_analytic and cfg.fading == "ricean":
        raise ConfigurationError(
            "mode: analytic evaluation assumes Rayleigh fading; use "
            "mode = montecarlo for ricean"
        )


def scenario_from_config(cfg: RunConfig, lam: float | None = None) -> NetworkScenario:
    model = three_gpp_path_loss(
        a_los=db_to_linear(cfg.intercept_los_db),
        alpha_los=cfg.alpha_los,
        a_nlos=db_to_linear(cfg.intercept_nlos_db),
        alpha_nlos=cfg.alpha_nlos,
    )
    if cfg.profile == "linear":
        profile = LosProfile.linear(cfg.d1_km)
    elif cfg.profile == "exponential":
        profile = LosProfile.exponential(cfg.exp_r1_km, cfg.exp_r2_km)
    else:
        profile = LosProfile.single_slope()
    fading = (
        FadingModel.rayleigh()
        if cfg.fading == "rayleigh"
        else FadingModel.ricean(cfg.ricean_k_db)
    )
    return NetworkScenario(
        lam=cfg.lam if lam is None else lam,
        noise_mw=dbm_to_mw(cfg.noise_dbm),
        model=model,
        profile=profile,
        pc=PowerControl(p0_mw=dbm_to_mw(cfg.p0_dbm), epsilon=cfg.epsilon),
        fading=fading,
        ue_density_ratio=cfg.ue_density_ratio,
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.9g}"


def rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _analytic_point(args) -> tuple[float | None, float | None]:
    scenario, t_db, want_pcov, want_ase = args
    pcov = ase_val = None
    threshold = db_to_linear(t_db)
    if want_pcov:
        pcov = coverage_probability(
            scenario.model,
            scenario.profile,
            scenario.lam,
            scenario.pc,
            scenario.noise_mw,
            threshold,
        )
    if want_ase:
        ase_val = analytic_ase(
            scenario.model,
            scenario.profile,
            scenario.lam,
            scenario.pc,
            scenario.noise_mw,
            threshold,
        )
    return pcov, ase_val


def run_sweep(cfg: RunConfig) -> list[dict]:
    """Evaluate the configured sweep and return CSV rows in grid order."""
    if cfg.sweep == "threshold_db":
        points = [(cfg.lam, t_db) for t_db in cfg.threshold_db_grid]
    else:
        points = [(lam, cfg.threshold_db) for lam in cfg.lambda_grid]

    want_pcov = "pcov" in cfg.quantities
    want_ase = "ase" in cfg.quantities
    rows = [
        {
            "lambda_bs_per_km2": lam,
            "threshold_db": t_db,
            "epsilon": cfg.epsilon,
            "pcov_analytic": None,
            "pcov_mc": None,
            "mc_ci_halfwidth": None,
            "ase_analytic": None,
            "ase_mc": None,
        }
        for lam, t_db in points
    ]

    if cfg.mode in ("analytic", "both"):
        jobs = [
            (scenario_from_config(cfg, lam=lam), t_db, want_pcov, want_ase)
            for lam, t_db in points
        ]
        n_workers = cfg.workers or 1
        if n_workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(_analytic_point, jobs))
        else:
            results = [_analytic_point(job) for job in jobs]
        for row, (pcov, ase_val) in zip(rows, results):
            row["pcov_analytic"] = pcov
            row["ase_analytic"] = ase_val

    if cfg.mode in ("montecarlo", "both"):
        if cfg.sweep == "threshold_db":
            # One sample set serves the whole threshold grid.
            scenario = scenario_from_config(cfg)
            samples = simulate_sinr(
                scenario, cfg.drops, cfg.seed, workers=cfg.workers
            ).samples
            for row, (_, t_db) in zip(rows, points):
                p, half = empirical_ccdf(samples, db_to_linear(t_db))
                row["pcov_mc"] = p
                row["mc_ci_halfwidth"] = half
                if want_ase:
                    row["ase_mc"] = empirical_ase(samples, cfg.lam, db_to_linear(t_db))
        else:
            for row, (lam, t_db) in zip(rows, points):
                scenario = scenario_from_config(cfg, lam=lam)
                samples = simulate_sinr(
                    scenario, cfg.drops, cfg.seed, workers=cfg.workers
                ).samples
                p, half = empirical_ccdf(samples, db_to_linear(t_db))
                row["pcov_mc"] = p
                row["mc_ci_halfwidth"] = half
                if want_ase:
                    row["ase_mc"] = empirical_ase(samples, lam, db_to_linear(t_db))

    if cfg.out:
        Path(cfg.out).write_text(rows_to_csv(rows))
    return rows


# ---------------------------------------------------------------------------
# Figure recipes
# ---------------------------------------------------------------------------

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


def slope_breakpoints(lams: np.ndarray, values: np.ndarray) -> tuple[float | None, float | None]:
    """Densities bracketing the slow-growth region of a log-log curve.

    The first midpoint where the local log-log slope falls below 0.8 and
    the first midpoint after it where the slope recovers above 0.9.
    """
    loglam = np.log10(lams)
    logval = np.log10(np.maximum(values, 1e-300))
    slopes = np.diff(logval) / np.diff(loglam)
    mids = 10.0 ** (0.5 * (loglam[:-1] + loglam[1:]))
    lam0 = lam1 = None
    for mid, slope in zip(mids, slopes):
        if lam0 is None and slope < 0.8:
            lam0 = float(mid)
        elif lam0 is not None and lam1 is None and slope > 0.9:
            lam1 = float(mid)
    return lam0, lam1


def reproduce_figure(
    fig_id: str,
    out_dir: str | Path = ".",
    *,
    drops: int | None = None,
    seed: int = 12345,
    workers: int | None = None,
) -> list[Path]:
    """Emit the CSV curves behind one of the six experiment figures."""
    if fig_id not in FIGURE_IDS:
        raise ConfigurationError(f"unknown figure id {fig_id!r}; choose from {FIGURE_IDS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = load_config(
        overrides={
            "drops": drops or 10000,
            "seed": seed,
            "workers": workers,
            "ue_density_ratio": 20.0,
        }
    )
    written: list[Path] = []

    def emit(name: str, rows: list[dict]) -> None:
        path = out_dir / name
        path.write_text(rows_to_csv(rows))
        written.append(path)

    if fig_id == "fig1":
        cfg = replace(
            base,
            profile="single-slope",
            lam=10.0,
            epsilon=0.7,
            mode="both",
            sweep="threshold_db",
            threshold_db_grid=_parse_threshold_grid("-10:20:1"),
        )
        emit("fig1.csv", run_sweep(cfg))
    elif fig_id == "fig2":
        for lam in (10.0, 1000.0):
            cfg = replace(
                base,
                lam=lam,
                epsilon=0.7,
                mode="both",
                sweep="threshold_db",
                threshold_db_grid=_parse_threshold_grid("-10:20:1"),
            )
            emit(f"fig2_lambda{int(lam)}.csv", run_sweep(cfg))
    elif fig_id in ("fig3", "fig4"):
        quantity = "pcov" if fig_id == "fig3" else "ase"
        all_rows: list[dict] = []
        breakpoints: list[tuple[float, float | None, float | None]] = []
        for eps in (0.6, 0.7, 0.8):
            cfg = replace(
                base,
                epsilon=eps,
                mode="analytic",
                sweep="lambda",
                threshold_db=0.0,
                quantities=(quantity,),
            )
            rows = run_sweep(cfg)
            all_rows.extend(rows)
            if fig_id == "fig4":
                lams = np.array([row["lambda_bs_per_km2"] for row in rows])
                vals = np.array([row["ase_analytic"] for row in rows])
                lam0, lam1 = slope_breakpoints(lams, vals)
                breakpoints.append((eps, lam0, lam1))
        emit(f"{fig_id}.csv", all_rows)
        if fig_id == "fig4":
            lines = ["epsilon,lambda0,lambda1"]
            for eps, lam0, lam1 in breakpoints:
                lines.append(f"{_fmt(eps)},{_fmt(lam0)},{_fmt(lam1)}")
            path = out_dir / "fig4_breakpoints.csv"
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
    else:  # fig5, fig6: simulation-only ASE sweeps
        profile = "exponential" if fig_id == "fig5" else "linear"
        fading = "rayleigh" if fig_id == "fig5" else "ricean"
        all_rows = []
        for eps in (0.6, 0.7, 0.8):
            cfg = replace(
                base,
                profile=profile,
                fading=fading,
                epsilon=eps,
                mode="montecarlo",
                sweep="lambda",
                threshold_db=0.0,
                quantities=("ase",),
                lambda_grid=_parse_lambda_grid("0:3.5:4"),
            )
            all_rows.extend(run_sweep(cfg))
        emit(f"{fig_id}.csv", all_rows)
    return written


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulcov",
        description=(
            "Uplink coverage probability and area spectral efficiency of "
            "dense small-cell networks: analytical evaluation and exact "
            "Monte Carlo simulation."
        ),
    )
    parser.add_argument("--config", help="flat key=value configuration file")
    parser.add_argument("--figure", choices=FIGURE_IDS, help="emit a figure recipe and exit")
    parser.add_argument("--out-dir", default=".", help="output directory for figure recipes")
    parser.add_argument("--mode", choices=("analytic", "montecarlo", "both"))
    parser.add_argument("--sweep", choices=("threshold_db", "lambda"))
    parser.add_argument("--quantities", help="comma list: pcov,ase")
    parser.add_argument("--lambda", dest="lambda_", metavar="BS_PER_KM2")
    parser.add_argument("--epsilon")
    parser.add_argument("--threshold-db")
    parser.add_argument("--threshold-db-grid", metavar="START:STOP:STEP")
    parser.add_argument("--lambda-grid", metavar="LOG10LO:LOG10HI:PER_DECADE")
    parser.add_argument("--p0-dbm")
    parser.add_argument("--noise-dbm")
    parser.add_argument("--d1-km")
    parser.add_argument("--alpha-los")
    parser.add_argument("--alpha-nlos")
    parser.add_argument("--intercept-los-db")
    parser.add_argument("--intercept-nlos-db")
    parser.add_argument("--profile", choices=("linear", "exponential", "single-slope"))
    parser.add_argument("--fading", choices=("rayleigh", "ricean"))
    parser.add_argument("--ricean-k-db")
    parser.add_argument("--ue-density-ratio")
    parser.add_argument("--drops")
    parser.add_argument("--seed")
    parser.add_argument("--workers")
    parser.add_argument("--out", help="output CSV path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {
        "mode": args.mode,
        "sweep": args.sweep,
        "quantities": args.quantities,
        "lambda": args.lambda_,
        "epsilon": args.epsilon,
        "threshold_db": args.threshold_db,
        "threshold_db_grid": args.threshold_db_grid,
        "lambda_grid": args.lambda_grid,
        "p0_dbm": args.p0_dbm,
        "noise_dbm": args.noise_dbm,
        "d1_km": args.d1_km,
        "alpha_los": args.alpha_los,
        "alpha_nlos": args.alpha_nlos,
        "intercept_los_db": args.intercept_los_db,
        "intercept_nlos_db": args.intercept_nlos_db,
        "profile": args.profile,
        "fading": args.fading,
        "ricean_k_db": args.ricean_k_db,
        "ue_density_ratio": args.ue_density_ratio,
        "drops": args.drops,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        if args.figure:
            paths = reproduce_figure(
                args.figure,
                args.out_dir,
                drops=int(args.drops) if args.drops else None,
                seed=int(args.seed) if args.seed else 12345,
                workers=int(args.workers) if args.workers else None,
            )
            for path in paths:
                print(path)
            return 0
        cfg = load_config(args.config, overrides)
        rows = run_sweep(cfg)
        if cfg.out:
            print(cfg.out)
        else:
            sys.stdout.write(rows_to_csv(rows))
        return 0
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
