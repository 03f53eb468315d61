"""Numerical checks of the inequalities and bound shapes behind the theory.

Each function returns plain data (dicts / dataclasses) so that tests, the
CLI and the demo scripts can all consume it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..grids import Field, make_fast_grid, slow_grid_from
from ..solvers import SimConfig, Trajectory, run_gl, run_sh
from ..spectral import (BumpSpec, KernelSpec, SymbolSpec, bump_eval, exchange_defect,
                        kernel_build, kernel_sobolev_norm, ou_mode_update, symbol_eval)
from ..weights import (WeightSpec, c0_kappa_norm, check_weight_derivatives, holder_norm,
                       spectral_derivative, weight_eval, weighted_lp_norm, weighted_sobolev_norm)
from .sweep import fit_power_law

__all__ = [
    "EnergyReport",
    "check_energy_inequality",
    "check_quadratic_form",
    "diagnostics_suite",
    "domain_size_check",
    "energy_refinement_check",
    "energy_constants",
    "exchange_defect_table",
    "geometric_times",
    "kernel_bounds_fit",
    "kernel_bounds_table",
    "ou_variance_check",
    "projection_smallness",
    "quadratic_form_suite",
    "quadratic_form_constants",
    "random_band_limited",
    "regularity_ensemble",
    "regularity_report",
    "richardson_order",
    "semigroup_kernel_sup",
]


# ---------------------------------------------------------------- quadratic form

def quadratic_form_constants(rho: float) -> dict:
    """``C2`` of the weight and the coefficients ``a``, ``b`` of the quadratic-form bound.

    ``int w v L0 v <= -a ||v''||^2 + b ||v||^2`` with ``a = C2/(1+2 C2)`` and
    ``b = C2 (3 + 5 C2 / 2)``, norms in ``L^2_rho``.
    """
    c2 = check_weight_derivatives(WeightSpec(rho), 2)
    return {"C2": c2, "a": c2 / (1 + 2 * c2), "b": c2 * (3 + 2.5 * c2)}


def _weighted_inner(f: np.ndarray, g: np.ndarray, w: np.ndarray, dx: float) -> float:
    return float(np.sum(w * f * g) * dx)


def check_quadratic_form(v: Field, rho: float, rtol: float = 1e-10) -> tuple[float, float, bool]:
    """Both sides of ``int w v L0 v <= -a ||v''||^2 + b ||v||^2`` for a real field."""
    g = v.grid
    const = quadratic_form_constants(rho)
    w = weight_eval(WeightSpec(rho), g.x)
    vals = np.asarray(v.physical(), dtype=float)
    L0v = g.to_physical(symbol_eval(SymbolSpec("SH"), g.k) * g.to_spectral(vals), real=True)
    lhs = _weighted_inner(vals, L0v, w, g.dx)
    d2 = spectral_derivative(Field(g, vals), 2)
    rhs = -const["a"] * _weighted_inner(d2, d2, w, g.dx) + const["b"] * _weighted_inner(
        vals, vals, w, g.dx)
    scale = abs(lhs) + abs(rhs)
    return lhs, rhs, bool(lhs <= rhs + rtol * scale)


def random_band_limited(grid, rng: np.random.Generator, kmax: float | None = None) -> Field:
    """Real field with random Gaussian coefficients on ``|k| <= kmax`` and a random envelope."""
    kmax = rng.uniform(0.3, 3.0) if kmax is None else kmax
    k = grid.k
    coeffs = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
    coeffs *= (np.abs(k) <= kmax) * (1 + np.abs(k)) ** (-rng.uniform(0, 2))
    vals = grid.to_physical(coeffs, real=True)
    # localise a random fraction of the draws so both growing and decaying data occur
    if rng.random() < 0.5:
        width = rng.uniform(2.0, grid.half_length)
        env = np.exp(-(grid.x / width) ** 2)
        vals = grid.to_physical(grid.to_spectral(vals * env) * (np.abs(k) <= kmax), real=True)
    return Field(grid, vals / max(np.max(np.abs(vals)), 1e-300))


# ---------------------------------------------------------------- energy inequality

def energy_constants(rho: float, nu: float, eps: float) -> dict:
    """Constants ``c``, ``C`` of the energy inequality built from measured weight constants.

    ``d/dt ||v||^2 <= -2a ||v''||^2 + 2(b + nu eps^2) ||v||^2 - ||v||_4^4 + 2 C_Z ||Z||_4^4``
    combined with ``||v||_{H^2}^2 <= (3/2 + C2/2) ||v||^2 + (3/2) ||v''||^2``.
    """
    q = quadratic_form_constants(rho)
    s = np.linspace(-6.0, 2.0, 400001)
    c_z = float(-np.min(0.5 * s ** 4 + 3 * s ** 3 + 3 * s ** 2 + s))
    c = 4.0 * q["a"] / 3.0
    C = max(2 * (q["b"] + nu * eps ** 2) + 2 * q["a"] * (1 + q["C2"] / 3), 2 * c_z)
    return {**q, "C_Z": c_z, "c": c, "C": C}


@dataclass
class EnergyReport:
    """Per-step sides of the discrete energy inequality and derived statistics."""

    dt: float
    lhs: np.ndarray
    rhs: np.ndarray
    derivative: np.ndarray
    constants: dict
    tolerance: float
    pass_fraction: float
    tolerance_needed: float
    discretization_defect: float
    measured_C: float
    details: dict = field(default_factory=dict)


def check_energy_inequality(traj: Trajectory, rho: float = 4.0, tol: float | None = None,
                            constants: dict | None = None) -> EnergyReport:
    """Discrete check of ``(||v||^2(t+dt) - ||v||^2(t)) / dt <= RHS(t) + tol``.

    ``traj`` must store ``v`` and ``Z`` at every step.  ``tol`` defaults to
    ``10 dt``.  Besides the pass fraction the report holds the smallest
    tolerance making every step pass, the largest gap between the forward
    difference and the exact derivative at the left point, and the smallest
    ``C`` (with the given ``c``) for which every step passes without tolerance.
    """
    cfg = traj.meta.get("config", {})
    nu, eps = cfg.get("nu", 0.0), cfg.get("eps", 0.0)
    const = constants or energy_constants(rho, nu, eps)
    steps = np.asarray(traj.steps)
    if len(steps) < 2 or np.any(np.diff(steps) != 1):
        raise ValueError("trajectory must store fields at every step")
    g = traj.grid
    dt = traj.dt
    tol = 10 * dt if tol is None else tol
    w = weight_eval(WeightSpec(rho), g.x)
    lam = symbol_eval(SymbolSpec("SH", nu, eps), g.k)
    V, Zs = traj.array("v"), traj.array("Z")
    n2 = np.array([_weighted_inner(v, v, w, g.dx) for v in V])
    h2 = np.array([weighted_sobolev_norm(Field(g, v), 2, 2, WeightSpec(rho)) ** 2 for v in V])
    l4 = np.array([float(np.sum(w * v ** 4) * g.dx) for v in V])
    z4 = np.array([float(np.sum(w * z ** 4) * g.dx) for z in Zs])
    deriv = np.empty(len(V))
    for i, (v, z) in enumerate(zip(V, Zs)):
        Lv = g.to_physical(lam * g.to_spectral(v), real=True)
        nl = cfg.get("nonlinearity", True)
        dv = Lv - (v + z) ** 3 if nl else Lv
        deriv[i] = 2 * _weighted_inner(v, dv, w, g.dx)
    lhs = np.diff(n2) / dt
    c, C = const["c"], const["C"]
    rhs = (-c * h2 - l4 + C * n2 + C * z4)[:-1]
    gap = lhs - rhs
    denom = (n2 + z4)[:-1]
    need = lhs + c * h2[:-1] + l4[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, need / denom, np.where(need > 0, np.inf, 0.0))
    return EnergyReport(
        dt=dt, lhs=lhs, rhs=rhs, derivative=deriv[:-1], constants=const, tolerance=tol,
        pass_fraction=float(np.mean(gap <= tol)) if len(gap) else 1.0,
        tolerance_needed=float(max(0.0, gap.max())) if len(gap) else 0.0,
        discretization_defect=float(np.max(np.abs(lhs - deriv[:-1]))) if len(gap) else 0.0,
        measured_C=float(max(0.0, ratio.max())) if len(gap) else 0.0,
        details={"norm2": n2, "h2": h2, "l4": l4, "z4": z4},
    )


# ---------------------------------------------------------------- regularity

def regularity_report(traj: Trajectory, rho: float = 4.0, p: int = 2, eta: float = 0.4,
                      kappa: float = 0.05) -> dict:
    """Sup over snapshots of the weighted norms of ``B``, ``A`` and ``Zs``."""
    g = traj.grid
    spec = WeightSpec(rho)
    out = {}
    B, A, Z = traj.array("B"), traj.array("A"), traj.array("Zs")

    def sup(vals):
        return float(np.max(vals))

    out[f"B_L{2 * p}"] = sup([weighted_lp_norm(Field(g, b), spec, 2 * p) for b in B])
    out["B_H1"] = sup([weighted_sobolev_norm(Field(g, b), 1, 2, spec) for b in B])
    out[f"B_W1,{2 * p}"] = sup([weighted_sobolev_norm(Field(g, b), 1, 2 * p, spec) for b in B])
    for name, arr in (("A", A), ("B", B), ("Zs", Z)):
        out[f"{name}_C0"] = sup([c0_kappa_norm(Field(g, a), kappa) for a in arr])
        out[f"{name}_Holder"] = sup([holder_norm(Field(g, a), eta, kappa) for a in arr])
    return out


def regularity_ensemble(cfg: SimConfig, seeds, moment: int = 4, **kwargs) -> dict:
    """Ensemble ``p``-th moments of the regularity report over ``seeds``."""
    reports = []
    for s in seeds:
        traj = run_gl(cfg.with_(seed=int(s), store_fields=True))
        reports.append(regularity_report(traj, **kwargs))
    keys = reports[0].keys()
    return {k: float(np.mean([r[k] ** moment for r in reports])) for k in keys}


# ---------------------------------------------------------------- OU statistics

def ou_variance_check(lams=(-0.1, -1.0, -10.0), t: float = 1.0, dt: float = 0.01,
                      replicas: int = 10_000, seed: int = 0) -> list[dict]:
    """Evolve complex OU modes with exact updates and compare ``E|z(t)|^2`` with theory."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(round(t / dt))
    out = []
    for lam in lams:
        z = np.zeros(replicas, dtype=complex)
        for _ in range(n):
            xi = (rng.standard_normal(replicas) + 1j * rng.standard_normal(replicas)) / np.sqrt(2)
            z = ou_mode_update(z, lam, dt, xi)
        emp = float(np.mean(np.abs(z) ** 2))
        theory = float(-np.expm1(2 * lam * n * dt) / (-2 * lam))
        out.append({"lambda": lam, "empirical": emp, "theory": theory,
                    "rel_err": abs(emp / theory - 1)})
    return out


# ---------------------------------------------------------------- kernels

def geometric_times(dt: float, t_max: float) -> np.ndarray:
    """``0, dt, 2dt, 4dt, ...`` up to ``t_max``, with ``t_max`` appended."""
    ts = [0.0]
    t = dt
    while t < t_max:
        ts.append(t)
        t *= 2
    ts.append(t_max)
    return np.asarray(ts)


def _kernel_k_grid(eps: float, center: float, delta: float, points_per_eps: int = 40):
    h = eps / points_per_eps
    span = center + 2 * delta + 0.1
    return np.arange(-span, span + h / 2, h)


def semigroup_kernel_sup(eps: float, m: float, T0: float = 1.0, nu: float = 1.0,
                         delta: float = 0.25, dt: float = 0.05) -> float:
    """``sup_t ||P e^{t lambda}||_{H^m}`` over the geometric grid on ``[0, T0/eps^2]``."""
    k = _kernel_k_grid(eps, 1.0, delta)
    return max(kernel_sobolev_norm(kernel_build(KernelSpec("SemigroupBand", t * eps ** 2, eps,
                                                           nu, delta), k), m)
               for t in geometric_times(dt, T0 / eps ** 2))


def kernel_bounds_table(eps_list=(0.4, 0.2, 0.1, 0.05), m_list=(0.5, 1.0),
                        T_list=(0.25, 1.0), nu: float = 1.0, delta: float = 0.25) -> list[dict]:
    """Rows ``(variant, eps, T, m, norm)`` for the band semigroup and the exchange kernels.

    ``SemigroupBand`` rows report the sup over the geometric t-grid up to
    ``T / eps^2``.
    """
    rows = []
    for eps in eps_list:
        for T in T_list:
            for m in m_list:
                rows.append({"variant": "SemigroupBand", "eps": eps, "T": T, "m": m,
                             "norm": semigroup_kernel_sup(eps, m, T, nu, delta)})
                kk = np.arange(-8.0, 8.0 + 1e-9, 1e-3)
                for variant in ("E2", "IC_band"):
                    mult = kernel_build(KernelSpec(variant, T, eps, nu, delta), kk)
                    rows.append({"variant": variant, "eps": eps, "T": T, "m": m,
                                 "norm": kernel_sobolev_norm(mult, m)})
    return rows


def exchange_defect_table(eps_list=(0.4, 0.3, 0.2, 0.15, 0.1), T_list=(0.25, 1.0),
                          variants=("E2", "E3"), nu: float = 0.0, kappa: float = 0.05,
                          profile=None) -> list[dict]:
    """``||E_i(T, D)||_{C0_kappa}`` for a fixed smooth ``D`` (default ``1/(1+X^2)``)."""
    profile = profile or (lambda X: 1.0 / (1.0 + X * X))
    rows = []
    for eps in eps_list:
        fast = make_fast_grid(math.ceil(8.0 / eps - 1e-9), 16)
        slow = slow_grid_from(fast, eps)
        D = Field(slow, np.asarray(profile(slow.x), dtype=complex))
        for T in T_list:
            for v in variants:
                e = exchange_defect(D, T, eps, v, nu=nu)
                rows.append({"variant": v, "eps": eps, "T": T, "norm": c0_kappa_norm(e, kappa)})
    return rows


def projection_smallness(eps_list=(1 / 4, 1 / 8, 1 / 16, 1 / 32), alpha: float = 0.4,
                         kappa: float = 0.05, delta: float = 0.25) -> dict:
    """``||P * D(eps .)||_{C0_kappa} / ||D||_{C^{0,alpha}_kappa}`` for a Weierstrass ``D``.

    ``D(X) = sum_n 2^{-n alpha} cos(2^n X)`` is exactly ``alpha``-Hölder and
    ``P`` is the smooth bump at ``+-1``, whose support avoids 0.  The series
    is cut at ``2^n <= 8 / eps`` so every term is resolved by the grid.
    """
    ratios = []
    for eps in eps_list:
        M = int(round(4 / eps))
        fast = make_fast_grid(M, 32)
        X = eps * fast.x
        n = np.arange(int(np.floor(np.log2(8.0 / eps))) + 1)
        D = np.sum(2.0 ** (-n[:, None] * alpha) * np.cos(2.0 ** n[:, None] * X[None, :]), axis=0)
        bump = bump_eval(BumpSpec(1.0, delta, symmetric=True), fast.k)
        PD = Field(fast, fast.to_physical(bump * fast.to_spectral(D), real=True))
        # Hölder norm in the slow variable: the same samples with spacing eps*dx
        Dslow = Field(_ScaledGrid(fast, eps), D)
        ratios.append(c0_kappa_norm(PD, kappa) / holder_norm(Dslow, alpha, kappa))
    slope, _, r2 = fit_power_law(list(zip(eps_list, ratios)))
    return {"eps": list(eps_list), "ratio": ratios, "slope": slope, "r2": r2}


class _ScaledGrid:
    """View of a fast grid with coordinates multiplied by ``eps``."""

    def __init__(self, grid, eps):
        self.n = grid.n
        self.spacing = grid.spacing * eps
        self.half_length = grid.half_length * eps
        self.x = grid.x * eps


# ---------------------------------------------------------------- solver checks

def domain_size_check(cfg: SimConfig, M_list=(2, 4, 8, 16), rho: float = 4.0) -> dict:
    """``||u^(M) - u^(2M)||_{L^2_rho}`` on the window of the smaller domain.

    All runs share one noise path; grids with equal spacing receive identical
    Gaussians on their common window.
    """
    finals = {}
    for M in M_list:
        traj = run_sh(cfg.with_(M=M, store_fields=True, record_every=10 ** 9))
        finals[M] = (traj.grid, traj.array("u")[-1])
    diffs = []
    for M_small, M_big in zip(M_list[:-1], M_list[1:]):
        g_s, u_s = finals[M_small]
        g_b, u_b = finals[M_big]
        offset = (M_big - M_small) * cfg.points_per_2pi
        window = u_b[offset:offset + g_s.n]
        diffs.append(weighted_lp_norm(Field(g_s, u_s - window), WeightSpec(rho), 2))
    return {"M": list(M_list), "diff": diffs,
            "decreasing": bool(all(b < a for a, b in zip(diffs[:-1], diffs[1:])))}


def richardson_order(cfg: SimConfig, dts=(0.02, 0.01, 0.005)) -> float:
    """Self-convergence order ``log2(|u_dt - u_dt/2| / |u_dt/2 - u_dt/4|)`` of the final field."""
    finals = []
    for dt in dts:
        traj = run_sh(cfg.with_(dt=dt, store_fields=True, record_every=10 ** 9))
        finals.append(traj.array("u")[-1])
    e1 = np.max(np.abs(finals[0] - finals[1]))
    e2 = np.max(np.abs(finals[1] - finals[2]))
    return float(np.log(e1 / e2) / np.log(dts[0] / dts[1]))


# ---------------------------------------------------------------- bundled checks

def energy_refinement_check(cfg: SimConfig | None = None, dt: float = 0.01, rho: float = 4.0,
                            ) -> dict:
    """Energy inequality at ``dt`` and ``dt/2`` on one noise realisation.

    The coarse run sums pairs of fine increments, so both runs see the same
    Brownian path.  The tolerance is ``10 dt`` (of the coarse step) for both.
    """
    cfg = cfg or SimConfig(eps=0.5, nu=1.0, sigma=1.0, M=4, seed=3, t_final=2.0, ic="mode",
                           ic_amplitude=1.0)
    tol = 10 * dt
    out = {}
    for label, step, refine in (("coarse", dt, 2), ("fine", dt / 2, 1)):
        run = cfg.with_(dt=step, noise_time_refine=refine * cfg.noise_time_refine,
                        record_every=1, store_fields=True, dt_max=max(cfg.dt_max, step))
        rep = check_energy_inequality(run_sh(run), rho, tol=tol)
        out[label] = {"pass_fraction": rep.pass_fraction, "tolerance_needed": rep.tolerance_needed,
                      "discretization_defect": rep.discretization_defect,
                      "measured_C": rep.measured_C}
    c, f = out["coarse"], out["fine"]
    out["defect_ratio"] = f["discretization_defect"] / c["discretization_defect"]
    out["passed"] = bool(
        c["pass_fraction"] >= 0.99 and f["pass_fraction"] >= 0.99
        and f["tolerance_needed"] <= 0.5 * c["tolerance_needed"] + 1e-12
        and out["defect_ratio"] <= 0.6)
    return out


def quadratic_form_suite(n_fields: int = 100, rho: float = 4.0, seed: int = 0, M: int = 8
                         ) -> dict:
    """``check_quadratic_form`` on ``n_fields`` random band-limited fields."""
    rng = np.random.default_rng(seed)
    g = make_fast_grid(M, 16)
    results = [check_quadratic_form(random_band_limited(g, rng), rho) for _ in range(n_fields)]
    passes = sum(r[2] for r in results)
    return {"n": n_fields, "passes": int(passes), "passed": passes == n_fields,
            "max_lhs_minus_rhs": float(max(r[0] - r[1] for r in results))}


def diagnostics_suite(seed: int = 0) -> list[dict]:
    """Rows ``{check, value, passed}`` for the inequality and statistics checks."""
    rows = []
    q = quadratic_form_suite(seed=seed)
    rows.append({"check": "quadratic_form", "value": q["passes"], "passed": q["passed"]})
    e = energy_refinement_check()
    rows.append({"check": "energy_inequality_pass_fraction",
                 "value": min(e["coarse"]["pass_fraction"], e["fine"]["pass_fraction"]),
                 "passed": e["passed"]})
    rows.append({"check": "energy_defect_ratio", "value": e["defect_ratio"],
                 "passed": e["defect_ratio"] <= 0.6})
    for r in ou_variance_check(seed=seed):
        rows.append({"check": f"ou_variance_lambda={r['lambda']}", "value": r["rel_err"],
                     "passed": r["rel_err"] <= 0.05})
    p = projection_smallness()
    rows.append({"check": "projection_smallness_slope", "value": p["slope"],
                 "passed": p["slope"] > 0})
    return rows


def kernel_bounds_fit(rows: list[dict], T: float = 1.0) -> dict:
    """Slopes of the ``SemigroupBand`` sup norms in ``eps`` for ``m = 0.5`` and ``m = 1``.

    Pass: ``slope >= -0.1`` at ``m = 0.5`` and ``-0.6 <= slope <= 0`` at ``m = 1``.
    """
    out = {}
    for m in (0.5, 1.0):
        pts = [(r["eps"], r["norm"]) for r in rows
               if r["variant"] == "SemigroupBand" and r["m"] == m and r["T"] == T]
        out[m] = fit_power_law(pts)[0] if len({p[0] for p in pts}) >= 2 else float("nan")
    out["passed"] = bool(out[0.5] >= -0.1 and -0.6 <= out[1.0] <= 0.0)
    return out
