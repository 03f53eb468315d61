"""Seeded space-time white noise and its coupled slow-scale counterpart.

Every Gaussian is a pure function of ``(seed, stream, step, position)``.
Positions are absolute lattice indices ``p`` with ``x = p * dx``, so two
grids with the same spacing but different lengths see identical noise on
their common window.  Generation uses numpy's counter-based Philox bit
generator, one short-lived generator per block of positions.

Normalisation
-------------
Fourier increments are returned as L2-orthonormal coefficients
``c_j = uhat_j * sqrt(dx / N)``, with ``uhat`` from ``grid.to_spectral``.
For a cylindrical Wiener process each ``c_j`` has ``E|c_j|^2 = dt``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import FastGrid, Field, SlowGrid

__all__ = [
    "NoisePath",
    "SlowNoiseView",
    "SlowWhiteNoise",
    "fast_increments",
    "band_coefficients",
    "fast_physical_increments",
    "independent_slow_noise",
    "slow_increments",
]

_BLOCK = 256
# maps negative block numbers into the unsigned counter word
_BLOCK_OFFSET = 1 << 62
_MASK64 = (1 << 64) - 1

_STREAM_FAST = 0
_STREAM_SLOW_RE = 1
_STREAM_SLOW_IM = 2


def _gaussians(seed: int, stream: int, step: int, p0: int, count: int) -> np.ndarray:
    """Standard normals for absolute positions ``p0 .. p0+count-1`` at ``step``."""
    b0 = p0 // _BLOCK
    b1 = (p0 + count - 1) // _BLOCK
    chunks = []
    for b in range(b0, b1 + 1):
        bg = np.random.Philox(
            key=np.array([seed & _MASK64, stream], dtype=np.uint64),
            counter=np.array([0, 0, b + _BLOCK_OFFSET, step], dtype=np.uint64),
        )
        chunks.append(np.random.Generator(bg).standard_normal(_BLOCK))
    flat = np.concatenate(chunks)
    start = p0 - b0 * _BLOCK
    return flat[start:start + count]


def _coarse_gaussians(seed, stream, step, p0, count, space_refine, time_refine):
    """Normalised sums of fine Gaussians: one standard normal per coarse cell."""
    total = np.zeros(count)
    for s in range(time_refine):
        fine = _gaussians(seed, stream, step * time_refine + s, p0 * space_refine,
                          count * space_refine)
        total += fine.reshape(count, space_refine).sum(axis=1)
    if space_refine * time_refine == 1:
        return total
    return total / np.sqrt(space_refine * time_refine)


@dataclass(frozen=True)
class NoisePath:
    """Reproducible cylindrical Wiener process on fast grids.

    Parameters
    ----------
    seed : int
        64-bit key of the counter-based generator.
    dt : float
        Time step of the consuming solver.
    ref_points_per_2pi : int, optional
        Spatial key resolution.  When set, a grid with ``points_per_2pi``
        dividing it receives cell sums of the finer noise, which makes grids
        at different resolutions sample the same Wiener path.
    time_refine : int
        Number of fine time cells per step (same idea in time).
    """

    seed: int
    dt: float
    ref_points_per_2pi: int | None = None
    time_refine: int = 1

    def __post_init__(self):
        if self.dt < 0:
            raise ValueError("dt must be non-negative")
        if int(self.time_refine) != self.time_refine or self.time_refine < 1:
            raise ValueError("time_refine must be a positive integer")

    def _space_refine(self, grid: FastGrid) -> int:
        if self.ref_points_per_2pi is None:
            return 1
        r, rem = divmod(self.ref_points_per_2pi, grid.points_per_2pi)
        if rem or r < 1:
            raise ValueError("grid resolution must divide the reference resolution")
        return r

    def standard_normals(self, step: int, grid: FastGrid) -> np.ndarray:
        """One standard normal per grid point for ``step`` (physical order)."""
        if step < 0:
            raise ValueError("step must be non-negative")
        p0 = -grid.M * grid.points_per_2pi
        return _coarse_gaussians(self.seed, _STREAM_FAST, step, p0, grid.n,
                                 self._space_refine(grid), self.time_refine)


def fast_physical_increments(path: NoisePath, step: int, grid: FastGrid) -> np.ndarray:
    """Real-space increments ``dW_i ~ N(0, dt/dx)``, i.i.d. over points."""
    if path.dt == 0:
        return np.zeros(grid.n)
    return np.sqrt(path.dt / grid.dx) * path.standard_normals(step, grid)


def fast_increments(path: NoisePath, step: int, grid: FastGrid) -> Field:
    """Orthonormal Fourier increments of the fast Wiener process.

    Each mode has ``E|c_j|^2 = dt``; the array is Hermitian-symmetric.
    """
    dw = fast_physical_increments(path, step, grid)
    return Field(grid, grid.to_spectral(dw) * grid.orthonormal_scale(), space="fourier")


@dataclass(frozen=True)
class SlowNoiseView:
    """Complex slow-scale noise derived from the fast band around ``k = 1``.

    Slow mode ``m`` uses the fast mode ``k = 1 + eps K_m``; only modes with
    ``|k - 1| <= delta`` carry noise.  One slow step spans
    ``steps_per_slow`` fast steps, so ``dT = eps^2 * dt * steps_per_slow``.
    """

    path: NoisePath
    grid: SlowGrid
    steps_per_slow: int = 1

    def __post_init__(self):
        if self.grid.parent is None:
            raise ValueError("slow grid must be derived from a fast grid")
        if int(self.steps_per_slow) != self.steps_per_slow or self.steps_per_slow < 1:
            raise ValueError("steps_per_slow must be a positive integer")

    @property
    def delta(self) -> float:
        return self.grid.delta

    @property
    def dT(self) -> float:
        return self.grid.eps ** 2 * self.path.dt * self.steps_per_slow


def band_coefficients(fast_coeffs: np.ndarray, slow: SlowGrid) -> np.ndarray:
    """Scatter orthonormal fast coefficients onto slow modes, noise band only.

    Returns ``eps * c_{2M+m}`` at slow mode ``m``.  This scaling gives slow
    orthonormal modes variance ``eps^2 dt = dT`` per fast step.
    """
    out = np.zeros(slow.n, dtype=complex)
    sel = slow.noise_band
    out[sel] = slow.eps * fast_coeffs[slow.fast_index[sel]]
    return out


def slow_increments(view: SlowNoiseView, slow_step: int) -> Field:
    """Orthonormal slow increments for one slow step (variance ``dT`` per band mode)."""
    if slow_step < 0:
        raise ValueError("slow_step must be non-negative")
    fast = view.grid.parent
    total = np.zeros(view.grid.n, dtype=complex)
    for s in range(view.steps_per_slow):
        c = fast_increments(view.path, slow_step * view.steps_per_slow + s, fast).values
        total += band_coefficients(c, view.grid)
    return Field(view.grid, total, space="fourier")


@dataclass(frozen=True)
class SlowWhiteNoise:
    """Independent complex space-time white noise on a slow grid.

    Physical increments have ``Var(Re) = Var(Im) = dT / (2 dX)``, so the
    orthonormal modes have ``E|d_m|^2 = dT``.  ``ref_n`` plays the role of
    ``NoisePath.ref_points_per_2pi`` for grids of a fixed length.
    """

    grid: SlowGrid
    dT: float
    seed: int
    ref_n: int | None = None

    def _space_refine(self) -> int:
        if self.ref_n is None:
            return 1
        r, rem = divmod(self.ref_n, self.grid.n)
        if rem or r < 1:
            raise ValueError("grid size must divide ref_n")
        return r

    def physical(self, step: int) -> np.ndarray:
        if self.dT == 0:
            return np.zeros(self.grid.n, dtype=complex)
        r = self._space_refine()
        p0 = -self.grid.n // 2
        re = _coarse_gaussians(self.seed, _STREAM_SLOW_RE, step, p0, self.grid.n, r, 1)
        im = _coarse_gaussians(self.seed, _STREAM_SLOW_IM, step, p0, self.grid.n, r, 1)
        return np.sqrt(self.dT / (2 * self.grid.spacing)) * (re + 1j * im)

    def __call__(self, step: int) -> Field:
        g = self.grid
        return Field(g, g.to_spectral(self.physical(step)) * g.orthonormal_scale(),
                     space="fourier")

    increment = __call__


def independent_slow_noise(grid: SlowGrid, dT: float, seed: int,
                           ref_n: int | None = None) -> SlowWhiteNoise:
    """Per-step complex increments ``noise(step)`` with variance ``dT`` per mode."""
    if dT < 0:
        raise ValueError("dT must be non-negative")
    return SlowWhiteNoise(grid, float(dT), int(seed), ref_n)
