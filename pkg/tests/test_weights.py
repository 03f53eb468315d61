import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shgl.grids import Field, make_fast_grid
from shgl.weights import (NormSpec, WeightSpec, c0_kappa_direct, c0_kappa_norm,
                          check_weight_derivatives, dyadic_radii, holder_norm, spectral_derivative,
                          weight_eval, weighted_lp_norm, weighted_sobolev_norm)

G16 = make_fast_grid(16, 16)


def _random_field(rng, g=G16, kmax=3.0):
    c = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
    c *= np.abs(g.k) <= kmax
    return Field(g, g.to_physical(c, real=True))


@pytest.mark.parametrize("rho, c, x, expected", [(2, 1, 0, 1.0), (2, 1, 1, 0.5),
                                                 (2, 0.1, 10, 0.5)])
def test_weight_eval(rho, c, x, expected):
    assert weight_eval(WeightSpec(rho, c), x) == pytest.approx(expected, rel=1e-15)


@given(st.floats(0.1, 8), st.floats(0.01, 3), st.floats(-1e3, 1e3))
def test_weight_range_and_parity(rho, c, x):
    spec = WeightSpec(rho, c)
    w = weight_eval(spec, x)
    assert 0 < w <= 1
    assert w == weight_eval(spec, -x)


def test_lp_norm_zero_and_one():
    assert weighted_lp_norm(Field(G16, np.zeros(G16.n)), WeightSpec(2), 1) == 0
    one = Field(G16, np.ones(G16.n))
    assert weighted_lp_norm(one, WeightSpec(2), 1) == pytest.approx(np.pi, rel=0.02)
    # exact rectangle-rule value of the truncated integral
    assert weighted_lp_norm(one, WeightSpec(2), 1) == pytest.approx(
        2 * np.arctan(32 * np.pi), rel=1e-3)


def test_lp_norm_scaled_weight():
    eps = 0.5
    one = Field(G16, np.ones(G16.n))
    assert weighted_lp_norm(one, WeightSpec(2, eps), 1) == pytest.approx(np.pi / eps, rel=0.02)


def test_sobolev_sin_against_quadrature():
    f = Field(G16, np.sin(G16.x))
    w = weight_eval(WeightSpec(2), G16.x)
    oracle = np.sqrt(np.sum(w * (np.sin(G16.x) ** 2 + np.cos(G16.x) ** 2
                                 + np.sin(G16.x) ** 2)) * G16.dx)
    assert weighted_sobolev_norm(f, 2, 2, WeightSpec(2)) == pytest.approx(oracle, rel=1e-10)


def test_sobolev_trivial():
    one = Field(G16, np.ones(G16.n))
    assert weighted_sobolev_norm(one, 1, 2, WeightSpec(2)) == pytest.approx(
        weighted_lp_norm(one, WeightSpec(2), 2), rel=1e-12)
    assert weighted_sobolev_norm(Field(G16, np.zeros(G16.n)), 2, 2, WeightSpec(2)) == 0


def test_spectral_derivative_of_mode():
    d = spectral_derivative(Field(G16, np.sin(3 * G16.x)), 1)
    np.testing.assert_allclose(d, 3 * np.cos(3 * G16.x), atol=1e-11)


def test_c0_kappa_examples():
    assert c0_kappa_norm(Field(G16, np.ones(G16.n)), 0.05) == pytest.approx(1.0)
    assert c0_kappa_norm(Field(G16, np.zeros(G16.n)), 0.05) == 0
    x = Field(G16, G16.x.copy())
    assert c0_kappa_norm(x, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert c0_kappa_direct(x, 1.0) == pytest.approx(1.0, abs=1e-3)


def _holder_brute(f, eta, kappa, window=2.0):
    x, v = f.grid.x, np.asarray(f.values)
    best = 0.0
    for L in dyadic_radii(f.grid.half_length):
        inside = np.abs(x) <= L * (1 + 1e-12)
        xi, vi = x[inside], v[inside]
        dx = np.abs(xi[:, None] - xi[None, :])
        ok = (dx > 0) & (dx <= window + 1e-9)
        q = np.where(ok, np.abs(vi[:, None] - vi[None, :]) / np.where(ok, dx, 1) ** eta, 0)
        best = max(best, L ** -kappa * (np.abs(vi).max() + q.max()))
    return best


def test_holder_examples():
    g = make_fast_grid(2, 16)
    const = Field(g, np.full(g.n, 2.0))
    assert holder_norm(const, 0.5, 0.05) == pytest.approx(c0_kappa_norm(const, 0.05))
    absx = Field(g, np.abs(g.x))
    assert holder_norm(absx, 0.5, 0.05) == pytest.approx(_holder_brute(absx, 0.5, 0.05),
                                                         rel=1e-12)
    cosx = Field(g, np.cos(g.x))
    assert abs(holder_norm(cosx, 0.99, 0.05) - _holder_brute(cosx, 0.99, 0.05)) <= 1e-8


def test_holder_eta_to_zero_dominates_c0():
    rng = np.random.default_rng(3)
    f = _random_field(rng, make_fast_grid(4, 16))
    assert holder_norm(f, 1e-6, 0.05) >= c0_kappa_norm(f, 0.05)


@pytest.mark.parametrize("rho, c", [(2, 1), (2, 0.1)])
def test_weight_derivative_constant_c1(rho, c):
    assert check_weight_derivatives(WeightSpec(rho, c), 1) == pytest.approx(1.0, rel=1e-8)


def test_weight_derivative_trivial_and_c2():
    assert check_weight_derivatives(WeightSpec(4), 0) == 1.0
    # n=2, rho=4: P_2(y) = 20 y^2 - 4, sup |P_2| / (1+y^2)^2 = 25/6 at y^2 = 2/3
    assert check_weight_derivatives(WeightSpec(4), 2) == pytest.approx(25 / 6, rel=1e-8)


def test_weight_derivative_against_finite_differences():
    spec = WeightSpec(3.0, 0.7)
    x = np.linspace(-20, 20, 400001)
    w = weight_eval(spec, x)
    d2 = np.gradient(np.gradient(w, x), x)
    measured = np.max(np.abs(d2[10:-10]) / (0.7 ** 2 * w[10:-10]))
    assert measured == pytest.approx(check_weight_derivatives(spec, 2), rel=1e-3)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3))
def test_homogeneity(seed, alpha):
    f = _random_field(np.random.default_rng(seed))
    af = Field(G16, alpha * f.values)
    for norm in (NormSpec("Lp_weighted", p=2, weight=WeightSpec(2)),
                 NormSpec("Wkp_weighted", p=2, k=2, weight=WeightSpec(2)),
                 NormSpec("C0_kappa", kappa=0.05),
                 NormSpec("Holder_eta_kappa", eta=0.4, kappa=0.05)):
        assert norm(af) == pytest.approx(abs(alpha) * norm(f), rel=1e-12)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.5, 4), st.floats(0, 4))
def test_monotone_in_rho(seed, rho, extra):
    f = _random_field(np.random.default_rng(seed))
    assert (weighted_lp_norm(f, WeightSpec(rho + extra), 2)
            <= weighted_lp_norm(f, WeightSpec(rho), 2) * (1 + 1e-12))


def test_c0_norm_equivalence_family():
    rng = np.random.default_rng(5)
    kappa = 0.5
    ratios = []
    for _ in range(50):
        f = _random_field(rng)
        env = np.exp(-((G16.x - rng.uniform(-80, 80)) / rng.uniform(1, 40)) ** 2)
        f = Field(G16, f.values * env + rng.uniform(0, 1) * f.values)
        ratios.append(c0_kappa_norm(f, kappa) / c0_kappa_direct(f, kappa))
    # sup over dyadic L versus (1 + x^2)^{-kappa/2}: bounded above and below
    assert 2 ** (-kappa) <= min(ratios) and max(ratios) <= 2 ** (1.5 * kappa)


def test_local_sobolev_controlled_by_weighted():
    rng = np.random.default_rng(7)
    rho, p = 2.0, 2
    worst = 0.0
    for _ in range(20):
        f = _random_field(rng)
        full = weighted_sobolev_norm(f, 1, p, WeightSpec(rho))
        d = spectral_derivative(f, 1)
        for L in dyadic_radii(G16.half_length):
            m = np.abs(G16.x) <= L
            local = (np.sum(np.abs(f.values[m]) ** p + np.abs(d[m]) ** p) * G16.dx) ** (1 / p)
            worst = max(worst, L ** (-rho / p) * local / full)
    assert worst <= 2 ** (rho / (2 * p)) + 1e-12
