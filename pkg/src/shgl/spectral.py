"""Fourier symbols, semigroups, exact OU updates, bump projections and kernels."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grids import FastGrid, Field, GridError, SlowGrid

__all__ = [
    "BumpSpec",
    "KernelSpec",
    "Multiplier",
    "SymbolSpec",
    "bump_eval",
    "exchange_defect",
    "grid_wavenumbers",
    "kernel_build",
    "kernel_sobolev_norm",
    "ou_mode_update",
    "ou_noise_std",
    "phi1",
    "phi2",
    "semigroup_apply",
    "symbol_eval",
]


@dataclass(frozen=True)
class SymbolSpec:
    """Linear operator symbol.

    ``kind="SH"``: ``lambda(k) = -(1 - k^2)^2 + nu eps^2``.
    ``kind="GL"``: ``mu(K) = -4 K^2 + nu``.
    """

    kind: str
    nu: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("SH", "GL"):
            raise ValueError(f"kind must be 'SH' or 'GL', got {self.kind!r}")

    @property
    def upper_bound(self) -> float:
        return self.nu * self.eps ** 2 if self.kind == "SH" else self.nu


def symbol_eval(spec: SymbolSpec, wavenumber):
    k = np.asarray(wavenumber, dtype=float)
    if spec.kind == "SH":
        return -((1.0 - k * k) ** 2) + spec.nu * spec.eps ** 2
    return -4.0 * k * k + spec.nu


def grid_wavenumbers(grid) -> np.ndarray:
    """``k`` on a fast grid, ``K`` on a slow grid."""
    if isinstance(grid, FastGrid):
        return grid.k
    if isinstance(grid, SlowGrid):
        return grid.K
    raise GridError(f"unsupported grid {grid!r}")


def semigroup_apply(spec: SymbolSpec, t: float, f: Field) -> Field:
    """Mode-wise multiplication by ``exp(t * symbol)``; result in ``f.space``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    mult = np.exp(t * symbol_eval(spec, grid_wavenumbers(f.grid)))
    coeffs = mult * f.spectral()
    if f.space == "fourier":
        return Field(f.grid, coeffs, "fourier")
    out = f.grid.to_physical(coeffs)
    return Field(f.grid, out.real if np.isrealobj(f.values) else out)


def phi1(z):
    """``(e^z - 1) / z`` with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + z / 2.0 + z * z / 6.0, np.expm1(zs) / zs)


def phi2(z):
    """``(e^z - 1 - z) / z^2``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    return np.where(small, 0.5 + z / 6.0 + z * z / 24.0, (np.expm1(zs) - zs) / (zs * zs))


def ou_noise_std(lam, dt: float, allow_positive: bool = False):
    """Standard deviation of ``int_0^dt e^{lam s} dW_s``.

    ``lam > 0`` raises unless ``allow_positive`` (then warns once); the
    closed form stays valid for any ``lam != 0``.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam > 0):
        if not allow_positive:
            raise ValueError("OU update requires lambda <= 0")
        warnings.warn("positive mode rate in OU update", RuntimeWarning, stacklevel=2)
    return np.sqrt(dt * phi1(2.0 * lam * dt))


def ou_mode_update(z, lam, dt: float, xi, allow_positive: bool = False):
    """Exact update ``z <- e^{lam dt} z + s * xi``, ``s^2 = (e^{2 lam dt} - 1) / (2 lam)``.

    ``xi`` is a (complex) standard Gaussian, ``E|xi|^2 = 1``.
    """
    s = ou_noise_std(lam, dt, allow_positive)
    return np.exp(np.asarray(lam) * dt) * z + s * xi


@dataclass(frozen=True)
class BumpSpec:
    """Smooth bump centred at ``center``: 1 on ``|k-l| <= delta``, 0 for ``|k-l| >= 2 delta``."""

    center: float
    half_width: float = 0.25
    symmetric: bool = False

    def __post_init__(self):
        if not 0 < self.half_width <= 0.5:
            raise ValueError("half_width must lie in (0, 1/2]")


def _smooth_step(s):
    """C-infinity step: 1 for ``s <= 0``, 0 for ``s >= 1``."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
        b = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    return a / (a + b)


def _single_bump(center, delta, k):
    return _smooth_step((np.abs(np.asarray(k, dtype=float) - center) - delta) / delta)


def bump_eval(spec: BumpSpec, k):
    """Bump value(s) in ``[0, 1]``; with ``symmetric`` the copies at ``+-center`` are summed."""
    out = _single_bump(spec.center, spec.half_width, k)
    if spec.symmetric and spec.center != 0:
        out = out + _single_bump(-spec.center, spec.half_width, k)
    return out


@dataclass(frozen=True)
class KernelSpec:
    """Exchange and semigroup kernels.

    Variants and their wavenumber variable:

    ``"SemigroupBand"``  fast ``k``:  ``P_l(k) exp(t lambda(k))`` with ``t = T / eps^2``
    ``"E2"``             slow ``l``:  ``P(eps l) e^{-4Tl^2+nu T} (e^{-4Tl^3 eps - l^4 T eps^2} - 1)``
    ``"E3"``             slow ``k``:  ``e^{nu T} e^{-T (4+k eps)^2 (2+k eps)^2 / eps^2} Q(3 + eps k)``
    ``"IC_band"``        fast offset ``k``:  ``P(k) (e^{-T k^2 (k+2)^2/eps^2} - e^{-4 k^2 T/eps^2}) e^{nu T}``
    ``"IC_tail"``        fast offset ``k``:  ``(1 - P(k)) e^{-4 k^2 T/eps^2} e^{nu T}``

    ``P`` is the bump at 0 (at ``+-ell`` for ``SemigroupBand``) and
    ``Q = 1 - P_1^2`` with ``P_1`` the symmetric bump at ``+-1``.
    """

    variant: str
    T: float
    eps: float
    nu: float = 0.0
    delta: float = 0.25
    ell: int = 1

    def __post_init__(self):
        if self.variant not in ("SemigroupBand", "E2", "E3", "IC_band", "IC_tail"):
            raise ValueError(f"unknown kernel variant {self.variant!r}")
        if self.T < 0:
            raise ValueError("T must be non-negative")


@dataclass(frozen=True)
class Multiplier:
    """Multiplier values on a wavenumber array."""

    k: np.ndarray
    values: np.ndarray


def kernel_build(spec: KernelSpec, grid) -> Multiplier:
    """Evaluate a kernel on ``grid.k`` / ``grid.K`` or on an explicit wavenumber array."""
    if isinstance(grid, (FastGrid, SlowGrid)):
        k = grid_wavenumbers(grid)
    elif hasattr(grid, "k"):
        k = np.asarray(grid.k, dtype=float)
    else:
        k = np.asarray(grid, dtype=float)
    T, eps, nu, d = spec.T, spec.eps, spec.nu, spec.delta
    p0 = BumpSpec(0.0, d)
    if spec.variant == "SemigroupBand":
        t = T / eps ** 2
        bump = bump_eval(BumpSpec(float(spec.ell), d, symmetric=True), k)
        vals = bump * np.exp(t * symbol_eval(SymbolSpec("SH", nu, eps), k))
    elif spec.variant == "E2":
        vals = (bump_eval(p0, eps * k) * np.exp(-4 * T * k ** 2 + nu * T)
                * np.expm1(-4 * T * k ** 3 * eps - k ** 4 * T * eps ** 2))
    elif spec.variant == "E3":
        q = 1.0 - bump_eval(BumpSpec(1.0, d, symmetric=True), 3 + eps * k) ** 2
        vals = np.exp(nu * T - T / eps ** 2 * (4 + k * eps) ** 2 * (2 + k * eps) ** 2) * q
    elif spec.variant == "IC_band":
        vals = (bump_eval(p0, k) * (np.exp(-T / eps ** 2 * k ** 2 * (k + 2) ** 2)
                                    - np.exp(-4 * k ** 2 * T / eps ** 2)) * np.exp(nu * T))
    else:
        vals = (1.0 - bump_eval(p0, k)) * np.exp(-4 * k ** 2 * T / eps ** 2 + nu * T)
    return Multiplier(k, vals)


def kernel_sobolev_norm(multiplier, m: float, pad: int = 4) -> float:
    """``H^m`` norm of the multiplier as a function of the wavenumber.

    Computed spectrally: ``||f||^2 = int |F f(z)|^2 (1 + z^2)^m dz`` with the
    unitary Fourier transform ``F``, evaluated by FFT of the samples.  The
    wavenumbers must be uniformly spaced and cover the support of ``f``.

    Parameters
    ----------
    multiplier : Multiplier or Field
    m : float in [0, 2]
    pad : int
        Zero-padding factor refining the ``z`` lattice.
    """
    if not 0 <= m <= 2:
        raise ValueError("m must lie in [0, 2]")
    if isinstance(multiplier, Field):
        k = grid_wavenumbers(multiplier.grid)
        vals = multiplier.values
    else:
        k, vals = multiplier.k, multiplier.values
    order = np.argsort(k)
    k = np.asarray(k, dtype=float)[order]
    vals = np.asarray(vals)[order]
    h = np.diff(k)
    if len(k) < 2 or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("wavenumbers must be uniformly spaced")
    h = h[0]
    n = pad * len(k)
    fz = np.fft.fft(vals, n=n)
    z = 2 * np.pi * np.fft.fftfreq(n, h)
    return float(np.sqrt(h / n * np.sum(np.abs(fz) ** 2 * (1 + z * z) ** m)))


def exchange_defect(D: Field, T: float, eps: float, variant: str = "E2",
                    carrier: int | None = None, nu: float = 0.0) -> Field:
    """Defect of exchanging the SH semigroup with the GL semigroup on a modulated field.

    ``E1``/``E2``: ``e^{tL}[D(eps x) e^{i l x}] - (e^{T Delta_nu} D)(eps x) e^{i x}``.
    ``E3``: ``e^{tL}[D(eps x) e^{i l x}]``.  Here ``t = T / eps^2`` and the
    carrier ``l`` defaults to 1 (E1/E2) or 3 (E3).
    """
    slow = D.grid
    if not isinstance(slow, SlowGrid) or slow.parent is None:
        raise GridError("D must live on a slow grid derived from a fast grid")
    if abs(slow.eps - eps) > 1e-12 * max(1.0, eps):
        raise GridError("eps does not match the slow grid")
    if slow.n != slow.parent.n:
        raise GridError("exchange_defect needs a slow grid with the fast point count")
    if variant not in ("E1", "E2", "E3"):
        raise ValueError(f"unknown variant {variant!r}")
    ell = carrier if carrier is not None else (3 if variant == "E3" else 1)
    fast = slow.parent
    t = T / eps ** 2
    dhat = slow.to_spectral(D.physical())
    # D(eps x_i) e^{i l x_i} is D's samples times the carrier: a shift by 2 M l modes
    fhat = np.roll(dhat, 2 * fast.M * ell)
    sh = np.exp(t * symbol_eval(SymbolSpec("SH", nu, eps), fast.k)) * fhat
    if variant != "E3":
        gl = np.exp(T * symbol_eval(SymbolSpec("GL", nu), slow.K)) * dhat
        sh = sh - np.roll(gl, 2 * fast.M)
    return Field(fast, fast.to_physical(sh))
