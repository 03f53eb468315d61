"""Monte Carlo eps-sweeps and log-log power-law fits."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..approximation import run_coupled
from ..solvers import BlowUpError, SimConfig

__all__ = [
    "QUANTITIES",
    "ScalingReport",
    "SweepPlan",
    "fit_power_law",
    "quantile_stats",
    "rerun_record",
    "run_records",
    "run_sweep",
    "scaling_report",
]

log = logging.getLogger(__name__)

# quantity -> (record key, default pass band, min R^2, target exponent description)
QUANTITIES = {
    "residual": ("sup_res_c0kappa", (1.2, 1.8), 0.9, "3/2 - 2 kappa"),
    "error": ("sup_err_l2rhoeps", (0.7, 1.3), 0.85, "1 - 2 delta"),
    "noise_defect": ("sup_noise_defect_c0gamma", (0.7, 1.2), 0.0, "1 - kappa"),
}


def fit_power_law(points) -> tuple[float, float, float]:
    """Least-squares line through ``(log eps, log value)``.

    Returns
    -------
    slope, intercept, r2 : float
        ``value ~ exp(intercept) * eps**slope``.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("eps and values must be positive")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("degenerate abscissa: all eps equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def quantile_stats(values) -> dict:
    v = np.asarray(values, dtype=float)
    return {
        "n": int(v.size),
        "median": float(np.quantile(v, 0.5)),
        "q90": float(np.quantile(v, 0.9)),
        "mean": float(v.mean()),
        "stderr": float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0,
    }


@dataclass
class SweepPlan:
    """An eps-sweep over seeds.

    The fast grid uses ``M = ceil(8 / eps)`` unless ``base.M`` is set, so
    the slow half-length stays near ``16 pi``.
    """

    eps_list: tuple = (0.4, 0.3, 0.2, 0.15, 0.1)
    seeds_per_eps: int = 16
    quantity: str = "residual"
    base: SimConfig = field(default_factory=SimConfig)
    first_seed: int = 0
    kappa: float = 0.05
    gamma: float = 0.05
    rho: float = 2.0
    workers: int = 1
    pass_band: tuple | None = None
    min_r2: float | None = None

    def __post_init__(self):
        if len(self.eps_list) < 3:
            raise ValueError("a sweep needs at least 3 eps values")
        if self.seeds_per_eps < 8:
            raise ValueError("a sweep needs at least 8 seeds per eps")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}")

    def configs(self) -> list[SimConfig]:
        out = []
        for eps in self.eps_list:
            for s in range(self.seeds_per_eps):
                out.append(self.base.with_(eps=float(eps), seed=self.first_seed + s))
        return out

    @property
    def band(self) -> tuple:
        return self.pass_band or QUANTITIES[self.quantity][1]

    @property
    def r2_min(self) -> float:
        return self.min_r2 if self.min_r2 is not None else QUANTITIES[self.quantity][2]


@dataclass
class ScalingReport:
    """Per-eps statistics and the fitted exponents of one swept quantity."""

    quantity: str
    key: str
    eps: list
    stats: list
    slope_q90: float
    intercept_q90: float
    r2_q90: float
    slope_median: float
    intercept_median: float
    r2_median: float
    pass_band: tuple
    min_r2: float
    target: str
    records: list = field(default_factory=list)
    failures: int = 0
    total_runs: int = 0

    @property
    def valid(self) -> bool:
        return self.total_runs > 0 and self.failures <= 0.2 * self.total_runs

    @property
    def passed(self) -> bool:
        lo, hi = self.pass_band
        ok_q90 = lo <= self.slope_q90 <= hi and self.r2_q90 >= self.min_r2
        ok_med = lo <= self.slope_median <= hi and self.r2_median >= self.min_r2
        return bool(self.valid and ok_q90 and ok_med)

    def rows(self) -> list[dict]:
        return [{"eps": e, **s} for e, s in zip(self.eps, self.stats)]

    def fit_meta(self) -> dict:
        return {
            "quantity": self.quantity, "slope_q90": self.slope_q90,
            "intercept_q90": self.intercept_q90, "r2_q90": self.r2_q90,
            "slope_median": self.slope_median, "intercept_median": self.intercept_median,
            "r2_median": self.r2_median, "band_lo": self.pass_band[0],
            "band_hi": self.pass_band[1], "min_r2": self.min_r2, "target": self.target,
            "failures": self.failures, "total_runs": self.total_runs, "passed": self.passed,
        }


def _run_one(args) -> dict:
    cfg_dict, kappa, gamma, rho, with_sh = args
    cfg = SimConfig.from_dict(cfg_dict)
    rec = {"eps": cfg.eps, "seed": cfg.seed, "config_hash": cfg.config_hash(),
           "config": cfg_dict, "kappa": kappa, "gamma": gamma, "rho": rho, "with_sh": with_sh}
    try:
        r = run_coupled(cfg, kappa=kappa, gamma=gamma, rho=rho, with_sh=with_sh)
    except BlowUpError as exc:
        rec["failed"] = str(exc)
        return rec
    rec["sup_res_c0kappa"] = r.sup("residual_c0")
    rec["sup_noise_defect_c0gamma"] = r.sup("noise_defect")
    rec["sup_uA_l4rhoeps"] = r.sup("uA_l4")
    if with_sh:
        rec["sup_err_l2rhoeps"] = r.sup("error_l2")
    rec["n_snapshots"] = len(r.t)
    return rec


def run_records(configs, kappa=0.05, gamma=0.05, rho=2.0, with_sh=True, workers=1) -> list[dict]:
    """One JSON-ready record per config; blow-ups are kept with a ``failed`` entry."""
    jobs = [(c.to_dict(), kappa, gamma, rho, with_sh) for c in configs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    for r in records:
        if "failed" in r:
            log.warning("run eps=%s seed=%s excluded: %s", r["eps"], r["seed"], r["failed"])
    return records


def rerun_record(record: dict) -> dict:
    """Re-execute a record from its stored config; the hash must match."""
    cfg = SimConfig.from_dict(record["config"])
    if cfg.config_hash() != record["config_hash"]:
        raise ValueError("config hash mismatch")
    return _run_one((record["config"], record["kappa"], record["gamma"], record["rho"],
                     record["with_sh"]))


def scaling_report(records: list[dict], quantity: str, pass_band=None, min_r2=None
                   ) -> ScalingReport:
    """Aggregate records into per-eps quantiles and fit both median and q90."""
    key, band, r2_default, target = QUANTITIES[quantity]
    ok = [r for r in records if "failed" not in r and key in r]
    eps_values = sorted({r["eps"] for r in ok}, reverse=True)
    stats = [quantile_stats([r[key] for r in ok if r["eps"] == e]) for e in eps_values]
    if len(eps_values) >= 2:
        s9, i9, r9 = fit_power_law([(e, s["q90"]) for e, s in zip(eps_values, stats)])
        sm, im, rm = fit_power_law([(e, s["median"]) for e, s in zip(eps_values, stats)])
    else:
        s9 = i9 = r9 = sm = im = rm = math.nan
    return ScalingReport(
        quantity=quantity, key=key, eps=eps_values, stats=stats,
        slope_q90=s9, intercept_q90=i9, r2_q90=r9,
        slope_median=sm, intercept_median=im, r2_median=rm,
        pass_band=tuple(pass_band or band), min_r2=r2_default if min_r2 is None else min_r2,
        target=target, records=records, failures=len(records) - len(ok),
        total_runs=len(records))


def run_sweep(plan: SweepPlan) -> ScalingReport:
    """Run every (eps, seed) of ``plan`` and fit the selected quantity."""
    with_sh = plan.quantity == "error"
    records = run_records(plan.configs(), plan.kappa, plan.gamma, plan.rho, with_sh, plan.workers)
    return scaling_report(records, plan.quantity, plan.band, plan.r2_min)
