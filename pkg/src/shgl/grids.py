"""Periodic grids on the fast scale ``x`` and the slow scale ``X = eps * x``.

Index convention
----------------
Physical samples are stored in increasing ``x`` starting at the left edge,
``x_i = -L/2 + i*dx`` for ``i = 0..N-1``.  Fourier coefficients are stored in
the standard FFT order (``numpy.fft.fftfreq``): integer mode index ``j`` runs
``0, 1, ..., N/2-1, -N/2, ..., -1``.  Coefficients are phased relative to
``x = 0``::

    uhat_j = sum_i u(x_i) exp(-1j * k_j * x_i)

so that ``exp(1j * k_j * x)`` has a single coefficient ``N`` at index ``j``
regardless of where the domain starts.  Every module uses this convention
through :meth:`FastGrid.to_spectral` / :meth:`FastGrid.to_physical` (and the
slow-grid equivalents).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Field",
    "FastGrid",
    "GridError",
    "SlowGrid",
    "interp_slow_to_fast",
    "make_fast_grid",
    "make_periodic_grid",
    "slow_grid_from",
]


class GridError(ValueError):
    """Raised for invalid grid parameters or mismatched grid provenance."""


class _PeriodicGrid:
    """Shared FFT plumbing for uniform periodic grids centred on the origin."""

    n: int
    spacing: float
    half_length: float

    @cached_property
    def index(self) -> np.ndarray:
        """Integer mode indices ``j`` in FFT order."""
        return np.rint(np.fft.fftfreq(self.n) * self.n).astype(np.int64)

    @cached_property
    def _phase(self) -> np.ndarray:
        # exp(-i k_j x_0) with x_0 = -L/2 and k_j L = 2 pi j  ->  (-1)^j
        return np.where(self.index % 2 == 0, 1.0, -1.0)

    @cached_property
    def x(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.n)

    @property
    def length(self) -> float:
        return 2.0 * self.half_length

    def to_spectral(self, u: np.ndarray) -> np.ndarray:
        return np.fft.fft(u, axis=-1) * self._phase

    def to_physical(self, uhat: np.ndarray, real: bool = False) -> np.ndarray:
        u = np.fft.ifft(uhat * self._phase, axis=-1)
        return u.real if real else u

    def orthonormal_scale(self) -> float:
        """Factor turning ``to_spectral`` output into L2-orthonormal coefficients."""
        return float(np.sqrt(self.spacing / self.n))


@dataclass(frozen=True, eq=False)
class FastGrid(_PeriodicGrid):
    """Periodic grid on ``[-2 pi M, 2 pi M)`` with ``points_per_2pi`` samples per 2 pi.

    The wavenumber lattice has spacing ``1/(2M)``, so ``k = 1`` sits at index
    ``2M`` and ``k = 3`` at ``6M``.
    """

    M: int
    points_per_2pi: int

    @property
    def n(self) -> int:
        return 2 * self.M * self.points_per_2pi

    N = n

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.points_per_2pi

    dx = spacing

    @property
    def half_length(self) -> float:
        return 2.0 * np.pi * self.M

    @property
    def dk(self) -> float:
        return 1.0 / (2 * self.M)

    @cached_property
    def k(self) -> np.ndarray:
        return self.index / (2.0 * self.M)

    def mode_index(self, wavenumber: float) -> int:
        """FFT-array position of a lattice wavenumber (raises if off-lattice)."""
        j = wavenumber * 2 * self.M
        if abs(j - round(j)) > 1e-9 or abs(round(j)) >= self.n // 2:
            raise GridError(f"wavenumber {wavenumber} is not on the lattice")
        return int(round(j)) % self.n

    def __repr__(self) -> str:
        return f"FastGrid(M={self.M}, points_per_2pi={self.points_per_2pi}, N={self.n})"


def make_fast_grid(M: int, points_per_2pi: int) -> FastGrid:
    """Build the fast periodic grid.

    Parameters
    ----------
    M : int
        Domain half-length is ``2*pi*M``.
    points_per_2pi : int
        Samples per ``2*pi``; must be even and at least 8 so that ``k = 3``
        lies below the Nyquist wavenumber.
    """
    if int(M) != M or M < 1:
        raise GridError(f"M must be a positive integer, got {M!r}")
    if int(points_per_2pi) != points_per_2pi or points_per_2pi % 2:
        raise GridError(f"points_per_2pi must be an even integer, got {points_per_2pi!r}")
    if points_per_2pi < 8:
        raise GridError("points_per_2pi must be at least 8 to resolve k = 3")
    return FastGrid(int(M), int(points_per_2pi))


@dataclass(frozen=True, eq=False)
class SlowGrid(_PeriodicGrid):
    """Slow-scale grid ``X = eps * x`` derived from a fast grid.

    The slow grid has the same number of samples as its parent, so
    ``dX = eps * dx`` and slow sample ``i`` sits at ``eps * x_i``.  Slow mode
    ``m`` has wavenumber ``K_m = m / (2 M eps)`` and corresponds to the fast
    mode ``j = 2M + m`` with ``k_j = 1 + eps K_m``.  ``band`` marks the modes
    whose fast partner lies in ``[1 - 2 delta, 1 + 2 delta]``;
    ``noise_band`` marks ``[1 - delta, 1 + delta]``.
    """

    eps: float
    n: int
    half_length: float
    delta: float
    band_halfwidth_index: int
    noise_halfwidth_index: int
    parent: FastGrid | None = field(default=None, repr=False)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    dX = spacing

    @property
    def dK(self) -> float:
        return 2.0 * np.pi / self.length

    @cached_property
    def K(self) -> np.ndarray:
        return self.index * self.dK

    @cached_property
    def band(self) -> np.ndarray:
        return np.abs(self.index) <= self.band_halfwidth_index

    @cached_property
    def noise_band(self) -> np.ndarray:
        return np.abs(self.index) <= self.noise_halfwidth_index

    @cached_property
    def fast_index(self) -> np.ndarray:
        """Fast FFT-array position of each in-band slow mode (``-1`` outside the band)."""
        if self.parent is None:
            return np.full(self.n, -1, dtype=np.int64)
        j = (2 * self.parent.M + self.index) % self.parent.n
        return np.where(self.band, j, -1)

    def __repr__(self) -> str:
        return f"SlowGrid(eps={self.eps}, n={self.n}, band=±{self.band_halfwidth_index})"


def slow_grid_from(
    fast: FastGrid, eps: float, band_halfwidth: float = 0.25, n_slow: int | None = None
) -> SlowGrid:
    """Slow grid for the envelope of the carrier ``exp(i x)`` on ``fast``.

    Parameters
    ----------
    fast : FastGrid
    eps : float
    band_halfwidth : float
        ``delta``; the envelope band is ``|k - 1| <= 2 delta``.
    n_slow : int, optional
        Slow sample count, default ``fast.n``.  Must be even and resolve the band.

    Raises
    ------
    GridError
        If ``eps`` or ``band_halfwidth`` are out of range, or the band
        ``[1 - 2 delta, 1 + 2 delta]`` holds fewer than 8 fast modes.
    """
    if not 0.0 < eps < 1.0:
        raise GridError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < band_halfwidth <= 0.5:
        raise GridError(f"band half-width must lie in (0, 1/2], got {band_halfwidth}")
    two_m = 2 * fast.M
    # integer arithmetic on the lattice: |k - 1| <= w  <=>  |m| <= floor(w * 2M)
    band_idx = int(np.floor(2 * band_halfwidth * two_m + 1e-9))
    noise_idx = int(np.floor(band_halfwidth * two_m + 1e-9))
    if 2 * band_idx + 1 < 8:
        raise GridError(
            f"band [1-2d, 1+2d] holds {2 * band_idx + 1} fast modes at dk={fast.dk}; need >= 8"
        )
    if 1 + 2 * band_halfwidth > fast.k.max():
        raise GridError("band exceeds the fast grid's Nyquist wavenumber")
    n_slow = fast.n if n_slow is None else int(n_slow)
    if n_slow % 2 or n_slow > fast.n or band_idx >= n_slow // 2:
        raise GridError(f"n_slow={n_slow} cannot hold the band ±{band_idx}")
    return SlowGrid(
        eps=float(eps),
        n=n_slow,
        half_length=fast.half_length * eps,
        delta=float(band_halfwidth),
        band_halfwidth_index=band_idx,
        noise_halfwidth_index=noise_idx,
        parent=fast,
    )


def make_periodic_grid(half_length: float, n: int, eps: float = 1.0) -> SlowGrid:
    """Stand-alone slow grid with every mode active (used for GL-only runs)."""
    if n % 2 or n < 8:
        raise GridError("n must be an even integer >= 8")
    return SlowGrid(
        eps=float(eps),
        n=int(n),
        half_length=float(half_length),
        delta=0.5,
        band_halfwidth_index=n // 2 - 1,
        noise_halfwidth_index=n // 2 - 1,
        parent=None,
    )


@dataclass(frozen=True, eq=False)
class Field:
    """Values of a real or complex function on a grid.

    ``space`` is ``"physical"`` (samples at ``grid.x``) or ``"fourier"``
    (coefficients in FFT order; the normalization is stated by the producer).
    """

    grid: _PeriodicGrid
    values: np.ndarray
    space: str = "physical"

    def __post_init__(self):
        if np.shape(self.values) != (self.grid.n,):
            raise GridError(
                f"field has shape {np.shape(self.values)}, grid expects ({self.grid.n},)"
            )

    @classmethod
    def from_spectral(cls, grid, coeffs: np.ndarray, real: bool = False) -> "Field":
        return cls(grid, grid.to_physical(coeffs, real=real))

    @classmethod
    def from_function(cls, grid, func) -> "Field":
        return cls(grid, np.asarray(func(grid.x)))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def spectral(self) -> np.ndarray:
        if self.space == "fourier":
            return self.values
        return self.grid.to_spectral(self.values)

    def physical(self) -> np.ndarray:
        if self.space == "physical":
            return self.values
        return self.grid.to_physical(self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * other, self.space)

    __rmul__ = __mul__


def interp_slow_to_fast(A: Field, fast: FastGrid) -> Field:
    """Evaluate ``A(eps * x)`` at the fast grid points by spectral zero-padding.

    Exact for fields band-limited on the slow grid.  With the default slow
    grid (same point count as the parent) the slow samples already sit at
    ``eps * x_i`` and the map reduces to the identity.
    """
    slow = A.grid
    if A.space != "physical":
        A = Field(slow, A.physical())
    if not isinstance(slow, SlowGrid) or slow.parent is None:
        raise GridError("A must live on a slow grid derived from a fast grid")
    if slow.parent is not fast and (
        slow.parent.M != fast.M or slow.parent.points_per_2pi != fast.points_per_2pi
    ):
        raise GridError("slow grid was not derived from this fast grid")
    if slow.n == fast.n:
        return Field(fast, np.array(A.values, copy=True))
    if slow.n > fast.n:
        raise GridError("slow grid finer than fast grid")
    coeffs = slow.to_spectral(A.values)
    padded = np.zeros(fast.n, dtype=complex)
    half = slow.n // 2
    padded[:half] = coeffs[:half]
    padded[-half + 1:] = coeffs[-half + 1:]
    # split the Nyquist coefficient symmetrically
    padded[half] += 0.5 * coeffs[half]
    padded[-half] += 0.5 * coeffs[half]
    # target: the slow domain resampled at N points, i.e. X_i = eps * x_i
    values = fast.to_physical(padded * (fast.n / slow.n))
    if np.isrealobj(A.values):
        values = values.real
    return Field(fast, values)
