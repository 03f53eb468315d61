"""Polynomial weights and the weighted norms built on them.

All integrals use the rectangle rule on the periodic grid; all derivatives
are spectral.  Norms over the real line are evaluated on the fundamental
domain only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.polynomial.polynomial as P

from .grids import Field

__all__ = [
    "NormSpec",
    "WeightSpec",
    "c0_kappa_direct",
    "c0_kappa_norm",
    "check_weight_derivatives",
    "dyadic_radii",
    "holder_norm",
    "spectral_derivative",
    "weight_eval",
    "weighted_lp_norm",
    "weighted_sobolev_norm",
]


@dataclass(frozen=True)
class WeightSpec:
    """``w(x) = (1 + c^2 x^2)^(-rho/2)``."""

    rho: float
    c: float = 1.0

    def __post_init__(self):
        if self.rho <= 0 or self.c <= 0:
            raise ValueError("rho and c must be positive")


@dataclass(frozen=True)
class NormSpec:
    """Parameter bundle naming one of the weighted norms.

    ``kind`` is one of ``"Lp_weighted"``, ``"Wkp_weighted"``, ``"C0_kappa"``,
    ``"Holder_eta_kappa"``.
    """

    kind: str
    p: float = 2.0
    k: int = 0
    kappa: float = 0.05
    eta: float = 0.5
    weight: WeightSpec | None = None

    def __post_init__(self):
        if self.kind not in ("Lp_weighted", "Wkp_weighted", "C0_kappa", "Holder_eta_kappa"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.p < 1 or self.k < 0 or self.kappa <= 0 or not 0 < self.eta < 1:
            raise ValueError("norm parameters out of range")

    def __call__(self, f: Field) -> float:
        if self.kind == "Lp_weighted":
            return weighted_lp_norm(f, self.weight, self.p)
        if self.kind == "Wkp_weighted":
            return weighted_sobolev_norm(f, self.k, self.p, self.weight)
        if self.kind == "C0_kappa":
            return c0_kappa_norm(f, self.kappa)
        return holder_norm(f, self.eta, self.kappa)


def weight_eval(spec: WeightSpec, x):
    return (1.0 + (spec.c * np.asarray(x, dtype=float)) ** 2) ** (-0.5 * spec.rho)


def _values(f: Field) -> np.ndarray:
    return f.physical()


def weighted_lp_norm(f: Field, spec: WeightSpec, p: float = 2.0) -> float:
    """``(sum_i w(x_i) |f(x_i)|^p dx)^(1/p)``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    w = weight_eval(spec, f.grid.x)
    return float((np.sum(w * np.abs(_values(f)) ** p) * f.grid.spacing) ** (1.0 / p))


def spectral_derivative(f: Field, order: int) -> np.ndarray:
    """``order``-th derivative of a band-limited field, physical values.

    The Nyquist mode is dropped for odd orders so real input stays real.
    """
    if order == 0:
        return np.array(_values(f), copy=True)
    g = f.grid
    kk = g.index * (2.0 * np.pi / g.length)
    mult = (1j * kk) ** order
    if order % 2:
        mult = np.where(g.index == -g.n // 2, 0.0, mult)
    out = g.to_physical(mult * f.spectral())
    return out.real if np.isrealobj(_values(f)) else out


def weighted_sobolev_norm(f: Field, k: int, p: float, spec: WeightSpec) -> float:
    """``(sum_{l <= k} ||d^l f||_{L^p_w}^p)^(1/p)`` with spectral derivatives."""
    if k < 0 or int(k) != k:
        raise ValueError("k must be a non-negative integer")
    total = 0.0
    for order in range(int(k) + 1):
        d = Field(f.grid, spectral_derivative(f, order))
        total += weighted_lp_norm(d, spec, p) ** p
    return float(total ** (1.0 / p))


def dyadic_radii(half_length: float) -> np.ndarray:
    """``1, 2, 4, ...`` up to ``half_length``, with ``half_length`` itself appended."""
    if half_length < 1:
        raise ValueError("grid half-length must be at least 1")
    radii = [1.0]
    while radii[-1] * 2 <= half_length:
        radii.append(radii[-1] * 2)
    if radii[-1] < half_length:
        radii.append(float(half_length))
    return np.asarray(radii)


def _radius_maxima(rad: np.ndarray, values: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """``max{values_i : rad_i <= L}`` for each ``L`` in ascending ``radii`` (0 if empty)."""
    slot = np.searchsorted(radii, rad * (1 - 1e-12), side="left")
    best = np.zeros(len(radii) + 1)
    np.maximum.at(best, slot, values)
    return np.maximum.accumulate(best)[:-1]


def c0_kappa_norm(f: Field, kappa: float) -> float:
    """``max_L L^(-kappa) sup_{|x| <= L} |f(x)|`` over dyadic ``L``."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    radii = dyadic_radii(f.grid.half_length)
    m = _radius_maxima(np.abs(f.grid.x), np.abs(_values(f)), radii)
    return float(np.max(radii ** (-kappa) * m))


def c0_kappa_direct(f: Field, kappa: float) -> float:
    """``sup_x (1 + x^2)^(-kappa/2) |f(x)|``."""
    w = weight_eval(WeightSpec(kappa), f.grid.x)
    return float(np.max(w * np.abs(_values(f))))


def _holder_pair_maxima(x, values, eta, window, radii) -> np.ndarray:
    """Largest Hölder quotient among pairs inside ``[-L, L]`` for each ``L``.

    Pairs are grid points up to ``window`` apart, without periodic wrap.
    """
    dx = x[1] - x[0]
    max_shift = min(len(x) - 1, int(np.floor(window / dx + 1e-9)))
    r = np.abs(x)
    best = np.zeros(len(radii))
    for s in range(1, max_shift + 1):
        q = np.abs(values[s:] - values[:-s]) / (s * dx) ** eta
        best = np.maximum(best, _radius_maxima(np.maximum(r[s:], r[:-s]), q, radii))
    return best


def holder_norm(f: Field, eta: float, kappa: float, window: float = 2.0) -> float:
    """Weighted Hölder norm ``max_L L^(-kappa) (||f||_{C0[-L,L]} + [f]_{eta,[-L,L]})``.

    The seminorm is taken over grid pairs with ``|x - y| <= window``.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    x = f.grid.x
    vals = np.asarray(_values(f))
    radii = dyadic_radii(f.grid.half_length)
    sup = _radius_maxima(np.abs(x), np.abs(vals), radii)
    quot = _holder_pair_maxima(x, vals, eta, window, radii)
    return float(np.max(radii ** (-kappa) * (sup + quot)))


def _weight_derivative_poly(rho: float, n: int) -> np.ndarray:
    """Coefficients of ``P_n`` with ``d^n/dy^n (1+y^2)^(-rho/2) = P_n(y) (1+y^2)^(-rho/2-n)``."""
    p = np.array([1.0])
    one_plus_y2 = np.array([1.0, 0.0, 1.0])
    for j in range(n):
        term1 = P.polymul(P.polyder(p) if len(p) > 1 else np.array([0.0]), one_plus_y2)
        term2 = P.polymul(p, np.array([0.0, 2.0 * (-rho / 2.0 - j)]))
        p = P.polyadd(term1, term2)
    return p


def check_weight_derivatives(spec: WeightSpec, n: int, y_max: float = 1e3,
                             samples: int = 200001) -> float:
    """Smallest ``C_n`` with ``|w^(n)(x)| <= C_n c^n w(x)`` on a fine grid.

    Uses ``w^(n)(x) / (c^n w(x)) = P_n(cx) / (1 + c^2 x^2)^n`` so the result
    does not depend on ``c``.
    """
    if not 0 <= n <= 4:
        raise ValueError("n must be in 0..4")
    if n == 0:
        return 1.0
    coeffs = _weight_derivative_poly(spec.rho, n)
    # dense near the origin where the extremum sits, sparse in the tail
    y = np.concatenate([np.linspace(0.0, 10.0, samples), np.geomspace(10.0, y_max, 2001)])
    ratio = np.abs(P.polyval(y, coeffs)) / (1.0 + y * y) ** n
    return float(ratio.max())
