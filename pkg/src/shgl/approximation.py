"""Modulated-wave approximation, its residual and its error.

The approximation is ``u_A(t, x) = eps A(eps^2 t, eps x) e^{ix} + c.c.``
with ``A`` from the Ginzburg-Landau solver driven by the slow noise that is
coupled to the fast noise of the Swift-Hohenberg equation.  The residual of
a candidate ``phi`` in the mild formulation is

    Res(phi)(t) = phi(t) - e^{tL} phi(0) + int_0^t e^{(t-s)L} phi(s)^3 ds - Z(t)

where ``Z = sigma eps^{3/2} W_L`` is the SH stochastic convolution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import FastGrid, Field, GridError, SlowGrid, interp_slow_to_fast
from .noise import NoisePath, band_coefficients, fast_physical_increments
from .solvers import (GLState, SHState, SimConfig, _GLOperator, _SHOperator, gl_setup,
                      sh_setup, step_gl, step_sh)
from .spectral import SymbolSpec, phi1, phi2, symbol_eval
from .weights import WeightSpec, c0_kappa_norm, weighted_lp_norm

__all__ = [
    "ApproximationPair",
    "CoupledRecord",
    "ResidualAccumulator",
    "approx_error",
    "build_uA",
    "noise_approx_defect",
    "residual_eval",
    "run_coupled",
]


def build_uA(A: Field, eps: float, fast: FastGrid, t: float | None = None) -> Field:
    """``eps A(eps x) e^{ix} + c.c.`` on the fast grid (``A`` taken at ``T = eps^2 t``)."""
    if eps == 0:
        return Field(fast, np.zeros(fast.n))
    if isinstance(A.grid, SlowGrid) and abs(A.grid.eps - eps) > 1e-12 * max(1.0, eps):
        raise GridError("eps does not match the slow grid")
    Af = interp_slow_to_fast(A, fast).values
    return Field(fast, 2.0 * eps * np.real(Af * np.exp(1j * fast.x)))


def _uA_values(A_phys: np.ndarray, eps: float, carrier: np.ndarray) -> np.ndarray:
    return 2.0 * eps * (A_phys.real * carrier.real - A_phys.imag * carrier.imag)


class ResidualAccumulator:
    """Running terms of ``Res(phi)`` in Fourier space.

    ``S = e^{tL} phi(0)`` and ``I = int_0^t e^{(t-s)L} phi(s)^3 ds`` are
    advanced by exact decay and by the exponential trapezoid rule, so each
    step costs one transform of ``phi^3``.
    """

    def __init__(self, grid: FastGrid, symbol: SymbolSpec, dt: float, phi0: np.ndarray):
        self.grid = grid
        self.dt = dt
        lam = symbol_eval(symbol, grid.k)
        z = lam * dt
        self.decay = np.exp(z)
        self.w_left = dt * (phi1(z) - phi2(z))
        self.w_right = dt * phi2(z)
        phi0 = np.asarray(phi0, dtype=float)
        self.S = grid.to_spectral(phi0)
        self.I = np.zeros(grid.n, dtype=complex)
        self._cube = grid.to_spectral(phi0 ** 3)
        self.t = 0.0
        self.step = 0

    def advance(self, phi_next: np.ndarray) -> None:
        cube_next = self.grid.to_spectral(np.asarray(phi_next, dtype=float) ** 3)
        self.I = self.decay * self.I + self.w_left * self._cube + self.w_right * cube_next
        self.S = self.decay * self.S
        self._cube = cube_next
        self.step += 1
        self.t = self.step * self.dt

    def residual(self, phi_now: np.ndarray, Z_hat: np.ndarray) -> np.ndarray:
        """Physical ``Res`` given ``phi(t)`` and the Fourier coefficients of ``Z(t)``."""
        rest = self.grid.to_physical(-self.S + self.I - Z_hat, real=True)
        return np.asarray(phi_now, dtype=float) + rest


def approx_error(u: Field, uA: Field, rho: float = 2.0, eps: float = 1.0) -> float:
    """``||u - u_A||`` in ``L^2`` with weight ``(1 + eps^2 x^2)^(-rho/2)``."""
    if u.grid is not uA.grid and u.grid.n != uA.grid.n:
        raise GridError("u and u_A live on different grids")
    return weighted_lp_norm(Field(u.grid, u.physical() - uA.physical()), WeightSpec(rho, eps), 2)


@dataclass
class CoupledRecord:
    """Per-snapshot scalars of a coupled run."""

    t: list = field(default_factory=list)
    residual_c0: list = field(default_factory=list)
    error_l2: list = field(default_factory=list)
    noise_defect: list = field(default_factory=list)
    uA_l4: list = field(default_factory=list)

    def sup(self, name: str) -> float:
        vals = getattr(self, name)
        return float(np.max(vals)) if vals else float("nan")


class ApproximationPair:
    """SH solution, coupled GL amplitude and residual accumulator advanced in lockstep.

    One slow step of size ``eps^2 dt`` is taken per fast step.  ``with_sh``
    toggles the (costly) SH solve, which is only needed for the error.
    """

    def __init__(self, cfg: SimConfig, with_sh: bool = True, with_residual: bool = True):
        self.cfg = cfg
        self.eps = cfg.eps
        self.path = cfg.noise_path()
        fast, slow, sh = sh_setup(cfg)
        if slow is None:
            raise ValueError("the coupled run needs an envelope initial condition")
        self.fast, self.slow = fast, slow
        _, self.gl = gl_setup(cfg, slow=slow)
        self.sh = sh if with_sh else None
        self.Z = np.zeros(fast.n, dtype=complex)
        self.dT = cfg.eps ** 2 * cfg.dt
        self._sh_op = _SHOperator(fast, cfg, cfg.dt)
        self._gl_op = _GLOperator(slow, cfg, self.dT)
        self._carrier = np.exp(1j * fast.x)
        self._fast_scale = fast.orthonormal_scale()
        self.acc = None
        if with_residual:
            self.acc = ResidualAccumulator(fast, SymbolSpec("SH", cfg.nu, cfg.eps), cfg.dt,
                                           self.uA_values())
        self.step = 0

    @property
    def t(self) -> float:
        return self.step * self.cfg.dt

    def A_values(self) -> np.ndarray:
        return self.slow.to_physical(self.gl.A)

    def uA_values(self) -> np.ndarray:
        # slow and fast grids share sample positions: X_i = eps x_i
        return _uA_values(self.A_values(), self.eps, self._carrier)

    def advance(self) -> None:
        cfg = self.cfg
        noise_hat = None
        orth_slow = None
        if cfg.sigma > 0:
            noise_hat = self.fast.to_spectral(fast_physical_increments(self.path, self.step,
                                                                       self.fast))
            orth_slow = band_coefficients(noise_hat * self._fast_scale, self.slow)
        if self.sh is not None:
            self.sh = step_sh(self.sh, cfg, self.path, self._sh_op, noise_hat)
            self.Z = self.sh.Z
        else:
            self.Z = self._sh_op.decay * self.Z
            if noise_hat is not None:
                self.Z = self.Z + self._sh_op.noise * noise_hat
        self.gl = step_gl(self.gl, cfg, None, self.dT, self._gl_op, orth_slow)
        self.step += 1
        if self.acc is not None:
            self.acc.advance(self.uA_values())

    def residual(self) -> np.ndarray:
        if self.acc is None:
            raise RuntimeError("residual tracking disabled")
        return self.acc.residual(self.uA_values(), self.Z)

    def error(self, rho: float = 2.0) -> float:
        if self.sh is None:
            raise RuntimeError("SH solve disabled")
        u = Field(self.fast, self.fast.to_physical(self.sh.u, real=True))
        return approx_error(u, Field(self.fast, self.uA_values()), rho, self.eps)

    def noise_defect_field(self) -> np.ndarray:
        """``E_s = Z - (eps Zs(eps x) e^{ix} + c.c.)``."""
        Zs = self.slow.to_physical(self.gl.Zs)
        return self.fast.to_physical(self.Z, real=True) - _uA_values(Zs, self.eps, self._carrier)


def residual_eval(pair: ApproximationPair, t: float, kappa: float = 0.05,
                  rho: float = 2.0) -> tuple[Field, dict]:
    """Residual of ``u_A`` at ``t`` with its ``C0_kappa`` and ``L2_{rho,eps}`` norms."""
    if abs(t - pair.t) > 1e-9 * max(1.0, t):
        raise ValueError(f"accumulator is at t={pair.t}, requested t={t}")
    res = Field(pair.fast, pair.residual())
    norms = {"c0_kappa": c0_kappa_norm(res, kappa),
             "l2_rho_eps": weighted_lp_norm(res, WeightSpec(rho, pair.eps), 2)}
    return res, norms


def run_coupled(cfg: SimConfig, kappa: float = 0.05, gamma: float = 0.05, rho: float = 2.0,
                with_sh: bool = True, with_residual: bool = True) -> CoupledRecord:
    """Run the coupled pair to ``cfg.horizon`` and record sup-norm ingredients."""
    pair = ApproximationPair(cfg, with_sh=with_sh, with_residual=with_residual)
    rec = CoupledRecord()
    stride = cfg.stride
    n_steps = cfg.n_steps

    def snap():
        rec.t.append(pair.t)
        if with_residual:
            rec.residual_c0.append(c0_kappa_norm(Field(pair.fast, pair.residual()), kappa))
        if with_sh:
            rec.error_l2.append(pair.error(rho))
        rec.noise_defect.append(c0_kappa_norm(Field(pair.fast, pair.noise_defect_field()),
                                              gamma))
        rec.uA_l4.append(weighted_lp_norm(Field(pair.fast, pair.uA_values()),
                                          WeightSpec(rho, cfg.eps), 4))

    snap()
    for n in range(n_steps):
        pair.advance()
        if (n + 1) % stride == 0 or n + 1 == n_steps:
            snap()
    return rec


def noise_approx_defect(path: NoisePath, eps: float, t: float, nu: float = 1.0,
                        sigma: float = 1.0, gamma: float = 0.05, M: int = 0,
                        points_per_2pi: int = 16, delta: float = 0.25, sup: bool = False,
                        record_every: int = 0) -> float:
    """``||E_s(t)||_{C0_gamma}`` for ``E_s = sigma eps^{3/2} W_L - (eps Zs e^{ix} + c.c.)``.

    Both stochastic convolutions are driven by ``path``.  With ``sup`` the
    maximum over snapshots in ``[0, t]`` is returned.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    n_steps = int(round(t / path.dt))
    if abs(n_steps * path.dt - t) > 1e-9 * max(1.0, t):
        raise ValueError("t is not on the step lattice")
    if sigma == 0 or n_steps == 0:
        return 0.0
    cfg = SimConfig(eps=eps, nu=nu, sigma=sigma, dt=path.dt, M=M, points_per_2pi=points_per_2pi,
                    delta=delta, seed=path.seed, nonlinearity=False, ic="zero",
                    t_final=t, record_every=record_every, dt_max=max(0.05, path.dt),
                    noise_ref_points_per_2pi=path.ref_points_per_2pi or 0,
                    noise_time_refine=path.time_refine)
    rec = run_coupled(cfg, gamma=gamma, with_sh=False, with_residual=False)
    return rec.sup("noise_defect") if sup else rec.noise_defect[-1]
