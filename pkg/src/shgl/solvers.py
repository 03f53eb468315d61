"""Exponential-Euler integrators for the stochastic Swift-Hohenberg and
Ginzburg-Landau equations.

Both solvers split the unknown into a random part that is an exact
Ornstein-Uhlenbeck process mode by mode (``Z`` / ``Zs``) and a remainder
(``v = u - Z`` / ``B = A - Zs``) that solves a random PDE with a cubic
nonlinearity::

    dv/dt = L v - (v + Z)^3,              L  = -(1 + d_x^2)^2 + nu eps^2
    dB/dT = 4 B'' + nu B - 3 |B + Zs|^2 (B + Zs)

State arrays hold unnormalised Fourier coefficients (``grid.to_spectral``).
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .grids import FastGrid, Field, SlowGrid, make_fast_grid, make_periodic_grid, slow_grid_from
from .noise import (NoisePath, SlowNoiseView, SlowWhiteNoise, fast_physical_increments,
                    slow_increments)
from .spectral import SymbolSpec, ou_noise_std, phi1, symbol_eval

__all__ = [
    "BlowUpError",
    "GLState",
    "SHState",
    "SimConfig",
    "Trajectory",
    "envelope_initial_condition",
    "gl_setup",
    "run_gl",
    "run_sh",
    "sh_setup",
    "step_gl",
    "step_sh",
    "stochastic_convolution_field",
]

log = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    """A mode exceeded the blow-up threshold or became non-finite."""

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulation.

    ``M = 0`` selects ``ceil(8 / eps)``.  ``t_final = 0`` selects the fast
    horizon ``T0 / eps^2``.  ``record_every = 0`` picks a stride giving
    about 200 snapshots.  ``ic`` is one of ``"envelope"`` (the family
    ``a0 + sum c_j e^{i K_j X} (1+X^2)^(-1/2)``, band-truncated, with
    ``u0 = u_A(0)``), ``"mode"`` (``u0 = ic_amplitude cos(ic_wavenumber x)``,
    ``A0 = ic_amplitude e^{i ic_wavenumber X}``), ``"constant"``
    (``A0 = ic_amplitude``) or ``"zero"``.
    """

    eps: float = 0.2
    nu: float = 1.0
    sigma: float = 1.0
    T0: float = 1.0
    dt: float = 0.05
    M: int = 0
    points_per_2pi: int = 16
    delta: float = 0.25
    seed: int = 0
    nonlinearity: bool = True
    dealias: bool = False
    record_every: int = 0
    t_final: float = 0.0
    ic: str = "envelope"
    ic_a0: float = 0.5
    ic_modes: tuple = ((0.25, 0.3, 0.0), (-0.5, 0.0, 0.2))
    ic_amplitude: float = 1.0
    ic_wavenumber: float = 1.0
    dt_max: float = 0.05
    blowup: float = 1e6
    store_fields: bool = False
    gl_half_length: float = 0.0
    gl_n: int = 0
    noise_ref_points_per_2pi: int = 0
    noise_time_refine: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.dt > self.dt_max:
            raise ValueError(f"dt={self.dt} exceeds dt_max={self.dt_max}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.ic not in ("envelope", "mode", "constant", "zero"):
            raise ValueError(f"unknown initial condition {self.ic!r}")
        object.__setattr__(self, "ic_modes", tuple(tuple(float(v) for v in m)
                                                   for m in self.ic_modes))

    @property
    def grid_M(self) -> int:
        return self.M if self.M > 0 else math.ceil(8.0 / self.eps - 1e-9)

    @property
    def horizon(self) -> float:
        """Fast-time horizon."""
        return self.t_final if self.t_final > 0 else self.T0 / self.eps ** 2

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def stride(self) -> int:
        return self.record_every if self.record_every > 0 else max(1, self.n_steps // 200)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ic_modes"] = [list(m) for m in self.ic_modes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "ic_modes" in d:
            d["ic_modes"] = tuple(tuple(m) for m in d["ic_modes"])
        return cls(**d)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def noise_path(self, dt: float | None = None) -> NoisePath:
        return NoisePath(self.seed, self.dt if dt is None else dt,
                         self.noise_ref_points_per_2pi or None, self.noise_time_refine)


@dataclass
class SHState:
    """Fourier coefficients of ``v`` and ``Z`` at fast time ``t``."""

    grid: FastGrid
    t: float
    step: int
    v: np.ndarray
    Z: np.ndarray

    @property
    def u(self) -> np.ndarray:
        return self.v + self.Z

    def field(self, name: str = "u") -> Field:
        return Field(self.grid, self.grid.to_physical(getattr(self, name), real=True))


@dataclass
class GLState:
    """Fourier coefficients of ``B`` and ``Zs`` at slow time ``T``."""

    grid: SlowGrid
    T: float
    step: int
    B: np.ndarray
    Zs: np.ndarray

    @property
    def A(self) -> np.ndarray:
        return self.B + self.Zs

    def field(self, name: str = "A") -> Field:
        return Field(self.grid, self.grid.to_physical(getattr(self, name)))


@dataclass
class Trajectory:
    """Snapshots of a run.

    ``fields[name]`` holds physical arrays, ``summaries[name]`` scalars,
    both aligned with ``times``.
    """

    times: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict)
    config_hash: str = ""
    seed: int = 0
    grid: object = None
    dt: float = 0.0
    meta: dict = field(default_factory=dict)

    def record(self, t: float, step: int, fields: dict | None = None,
               summaries: dict | None = None) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError("snapshot times must increase")
        self.times.append(float(t))
        self.steps.append(int(step))
        for k, v in (fields or {}).items():
            self.fields.setdefault(k, []).append(np.array(v, copy=True))
        for k, v in (summaries or {}).items():
            self.summaries.setdefault(k, []).append(float(v))

    def sup(self, name: str) -> float:
        return float(np.max(self.summaries[name]))

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.fields[name])


class _SHOperator:
    """Cached per-grid factors of the SH step."""

    def __init__(self, grid: FastGrid, cfg: SimConfig, dt: float):
        lam = symbol_eval(SymbolSpec("SH", cfg.nu, cfg.eps), grid.k)
        self.lam = lam
        self.decay = np.exp(lam * dt)
        self.phi = dt * phi1(lam * dt)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            std = ou_noise_std(lam, dt, allow_positive=True)
        # unnormalised coefficients: noise hat = std / sqrt(dt) * DFT(dW)
        self.noise = cfg.sigma * cfg.eps ** 1.5 * std / np.sqrt(dt)
        self.mask = np.abs(grid.index) <= grid.n // 3 if cfg.dealias else None


def _check_finite(coeffs: np.ndarray, n: int, limit: float, step: int, t: float) -> None:
    peak = np.max(np.abs(coeffs)) / n
    if not np.isfinite(peak) or peak > limit:
        raise BlowUpError(f"blow-up at step {step}, t={t:.6g}: max mode {peak:.3g}", step, t)


def step_sh(state: SHState, config: SimConfig, path: NoisePath, _op: _SHOperator | None = None,
            noise_hat: np.ndarray | None = None) -> SHState:
    """Advance ``(v, Z)`` by one exponential-Euler step of size ``path.dt``.

    ``noise_hat`` optionally supplies ``to_spectral`` of this step's
    physical increments, which must come from ``path``.
    """
    g = state.grid
    op = _op or _SHOperator(g, config, path.dt)
    v = op.decay * state.v
    if config.nonlinearity:
        u = g.to_physical(state.v + state.Z, real=True)
        nl = g.to_spectral(-u ** 3)
        if op.mask is not None:
            nl = nl * op.mask
        v = v + op.phi * nl
    Z = op.decay * state.Z
    if config.sigma > 0:
        if noise_hat is None:
            noise_hat = g.to_spectral(fast_physical_increments(path, state.step, g))
        Z = Z + op.noise * noise_hat
    t = (state.step + 1) * path.dt
    _check_finite(v, g.n, config.blowup, state.step + 1, t)
    return SHState(g, t, state.step + 1, v, Z)


class _GLOperator:
    def __init__(self, grid: SlowGrid, cfg: SimConfig, dT: float):
        mu = symbol_eval(SymbolSpec("GL", cfg.nu), grid.K)
        self.decay = np.exp(mu * dT) * grid.band
        self.phi = dT * phi1(mu * dT) * grid.band
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            std = ou_noise_std(mu, dT, allow_positive=True)
        # orthonormal noise d (variance dT) -> unnormalised coefficient
        self.noise = cfg.sigma * std / np.sqrt(dT) / grid.orthonormal_scale() * grid.band
        self.mask = grid.band


def step_gl(state: GLState, config: SimConfig, slow_noise, dT: float,
            _op: _GLOperator | None = None, noise_orth: np.ndarray | None = None) -> GLState:
    """Advance ``(B, Zs)`` by one step of size ``dT``.

    ``slow_noise`` is a ``SlowNoiseView`` or ``SlowWhiteNoise``; its
    orthonormal increments for the current step drive ``Zs`` (or pass them
    directly as ``noise_orth``).  All fields
    are Galerkin-projected onto the slow grid's band.
    """
    g = state.grid
    op = _op or _GLOperator(g, config, dT)
    B = op.decay * state.B
    if config.nonlinearity:
        A = g.to_physical(state.B + state.Zs)
        B = B + op.phi * g.to_spectral(-3.0 * (A.real ** 2 + A.imag ** 2) * A)
    Zs = op.decay * state.Zs
    if config.sigma > 0:
        if noise_orth is None:
            noise_orth = _slow_noise_values(slow_noise, state.step)
        Zs = Zs + op.noise * noise_orth
    T = (state.step + 1) * dT
    _check_finite(B, g.n, config.blowup, state.step + 1, T)
    return GLState(g, T, state.step + 1, B, Zs)


def _slow_noise_values(noise, step: int) -> np.ndarray:
    if isinstance(noise, SlowNoiseView):
        return slow_increments(noise, step).values
    return noise(step).values


def _lattice_K(grid: SlowGrid, K: float) -> float:
    return round(K / grid.dK) * grid.dK


def envelope_initial_condition(grid: SlowGrid, cfg: SimConfig) -> np.ndarray:
    """Fourier coefficients of ``A0`` on ``grid``, truncated to its band."""
    X = grid.x
    if cfg.ic == "zero":
        A0 = np.zeros(grid.n, dtype=complex)
    elif cfg.ic == "constant":
        A0 = np.full(grid.n, cfg.ic_amplitude, dtype=complex)
    elif cfg.ic == "mode":
        A0 = cfg.ic_amplitude * np.exp(1j * _lattice_K(grid, cfg.ic_wavenumber) * X)
    else:
        A0 = np.full(grid.n, cfg.ic_a0, dtype=complex)
        envelope = 1.0 / np.sqrt(1.0 + X * X)
        for K, re, im in cfg.ic_modes:
            A0 = A0 + complex(re, im) * np.exp(1j * _lattice_K(grid, K) * X) * envelope
    return grid.to_spectral(A0) * grid.band


def sh_setup(cfg: SimConfig, u0: np.ndarray | None = None, M: int | None = None
             ) -> tuple[FastGrid, SlowGrid | None, SHState]:
    """Grids and the initial SH state.

    Without ``u0`` the initial field comes from ``cfg.ic``: ``"mode"`` gives
    ``ic_amplitude * cos(ic_wavenumber x)``, the envelope options give
    ``u_A(0) = 2 eps Re(A0 e^{ix})``.
    """
    fast = make_fast_grid(M or cfg.grid_M, cfg.points_per_2pi)
    slow = None
    if u0 is None and cfg.ic != "mode":
        slow = slow_grid_from(fast, cfg.eps, cfg.delta)
    if u0 is None:
        if cfg.ic == "mode":
            u0 = cfg.ic_amplitude * np.cos(cfg.ic_wavenumber * fast.x)
        else:
            A0 = slow.to_physical(envelope_initial_condition(slow, cfg))
            u0 = 2.0 * cfg.eps * np.real(A0 * np.exp(1j * fast.x))
    u0 = np.asarray(u0, dtype=float)
    state = SHState(fast, 0.0, 0, fast.to_spectral(u0), np.zeros(fast.n, dtype=complex))
    return fast, slow, state


def gl_setup(cfg: SimConfig, A0: np.ndarray | None = None, slow: SlowGrid | None = None
             ) -> tuple[SlowGrid, GLState]:
    """Slow grid (derived, or stand-alone when ``gl_n`` is set) and the initial GL state."""
    if slow is not None:
        pass
    elif cfg.gl_n > 0:
        half = cfg.gl_half_length if cfg.gl_half_length > 0 else 2 * np.pi * cfg.grid_M * cfg.eps
        slow = make_periodic_grid(half, cfg.gl_n, cfg.eps)
    else:
        fast = make_fast_grid(cfg.grid_M, cfg.points_per_2pi)
        slow = slow_grid_from(fast, cfg.eps, cfg.delta)
    if A0 is None:
        B0 = envelope_initial_condition(slow, cfg)
    else:
        B0 = slow.to_spectral(np.asarray(A0, dtype=complex)) * slow.band
    return slow, GLState(slow, 0.0, 0, B0, np.zeros(slow.n, dtype=complex))


def _warn_positive(cfg: SimConfig) -> None:
    if cfg.nu > 0 and cfg.sigma > 0:
        log.info("nu=%g > 0: modes near |k| = 1 grow; OU updates use the lambda != 0 form",
                 cfg.nu)


def run_sh(config: SimConfig, u0: np.ndarray | None = None, observers=(),
           M: int | None = None, path: NoisePath | None = None) -> Trajectory:
    """Integrate the SH equation on ``[0, config.horizon]``.

    ``observers`` are callables ``f(state) -> dict`` whose scalars are
    recorded at every snapshot.  With ``config.store_fields`` the physical
    ``u``, ``v`` and ``Z`` are stored as well.
    """
    fast, _, state = sh_setup(config, u0, M)
    path = path or config.noise_path()
    op = _SHOperator(fast, config, path.dt)
    _warn_positive(config)
    traj = Trajectory(config_hash=config.config_hash(), seed=config.seed, grid=fast,
                      dt=path.dt, meta={"config": config.to_dict(), "kind": "SH"})

    def snap(s: SHState) -> None:
        flds = {}
        if config.store_fields:
            flds = {"v": fast.to_physical(s.v, real=True), "Z": fast.to_physical(s.Z, real=True)}
            flds["u"] = flds["v"] + flds["Z"]
        summ = {}
        for obs in observers:
            summ.update(obs(s))
        traj.record(s.t, s.step, flds, summ)

    snap(state)
    n_steps = int(round(config.horizon / path.dt))
    for n in range(n_steps):
        state = step_sh(state, config, path, op)
        if (n + 1) % config.stride == 0 or n + 1 == n_steps:
            snap(state)
    traj.meta["final_state"] = state
    return traj


def run_gl(config: SimConfig, A0: np.ndarray | None = None, noise=None, observers=(),
           dT: float | None = None) -> Trajectory:
    """Integrate the GL equation on ``[0, T0]``.

    The slow step defaults to ``eps^2 * dt``; for stand-alone grids
    (``gl_n > 0``) it defaults to ``dt``.  Without ``noise`` the run uses
    the band-coupled noise of ``config.noise_path()`` on derived grids and
    independent slow white noise on stand-alone grids.
    """
    slow, state = gl_setup(config, A0)
    if dT is None:
        dT = config.dt if config.gl_n > 0 else config.eps ** 2 * config.dt
    if noise is None:
        if slow.parent is not None:
            noise = SlowNoiseView(config.noise_path(), slow)
        else:
            noise = SlowWhiteNoise(slow, dT, config.seed,
                                   config.noise_ref_points_per_2pi or None)
    op = _GLOperator(slow, config, dT)
    traj = Trajectory(config_hash=config.config_hash(), seed=config.seed, grid=slow, dt=dT,
                      meta={"config": config.to_dict(), "kind": "GL"})
    n_steps = int(round(config.T0 / dT))
    stride = config.record_every if config.record_every > 0 else max(1, n_steps // 200)

    def snap(s: GLState) -> None:
        flds = {}
        if config.store_fields:
            flds = {"B": slow.to_physical(s.B), "Zs": slow.to_physical(s.Zs)}
            flds["A"] = flds["B"] + flds["Zs"]
        summ = {}
        for obs in observers:
            summ.update(obs(s))
        traj.record(s.T, s.step, flds, summ)

    snap(state)
    for n in range(n_steps):
        state = step_gl(state, config, noise, dT, op)
        if (n + 1) % stride == 0 or n + 1 == n_steps:
            snap(state)
    traj.meta["final_state"] = state
    return traj


def stochastic_convolution_field(symbol: SymbolSpec, noise, t: float, grid=None,
                                 sigma: float = 1.0, dt: float | None = None) -> Field:
    """The OU field ``sigma * int_0^t e^{(t-s) L} dW(s)`` at time ``t``.

    For ``symbol.kind == "SH"`` pass a ``NoisePath`` and a ``FastGrid``; the
    noise amplitude is ``sigma * eps^(3/2)``.  For ``"GL"`` pass a
    ``SlowNoiseView`` or ``SlowWhiteNoise`` and give ``dt`` (the slow step).
    """
    if symbol.kind == "SH":
        if grid is None:
            raise ValueError("SH stochastic convolution needs the fast grid")
        step = noise.dt
        amp = sigma * symbol.eps ** 1.5
    else:
        grid = noise.grid
        step = dt if dt is not None else getattr(noise, "dT", None)
        if step is None:
            raise ValueError("slow step dt required")
        amp = sigma
    if t < 0:
        raise ValueError("t must be non-negative")
    n = t / step if step > 0 else 0.0
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise ValueError(f"t={t} is not on the step lattice (dt={step})")
    n = int(round(n))
    k = grid.k if symbol.kind == "SH" else grid.K
    lam = symbol_eval(symbol, k)
    decay = np.exp(lam * step)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        std = ou_noise_std(lam, step, allow_positive=True) / np.sqrt(step) if step > 0 else 0.0
    z = np.zeros(grid.n, dtype=complex)
    if amp == 0:
        n = 0
    for s in range(n):
        if symbol.kind == "SH":
            w = grid.to_spectral(fast_physical_increments(noise, s, grid))
        else:
            w = _slow_noise_values(noise, s) / grid.orthonormal_scale()
        z = decay * z + amp * std * w
    out = grid.to_physical(z)
    return Field(grid, out.real if symbol.kind == "SH" else out)
