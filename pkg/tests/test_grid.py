import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import beta

from hartree6 import (
    ConfigurationError,
    RadialFunction,
    UsageError,
    build_grid,
    differentiate,
    weighted_inner_product,
    weighted_norm,
)
from hartree6.grid import cheb_diff_matrix, clenshaw_curtis_weights, interpolant
from hartree6.groundstate import AREA_S4, C_OMEGA, eval_lambda_omega, eval_omega, eval_omega_prime


def test_map_extent_n64():
    g = build_grid(64, 1.0)
    assert g.nodes[0] < 0.01
    assert g.nodes[-1] > 100


def test_node_count_bounds():
    assert build_grid(16).n == 16
    with pytest.raises(ConfigurationError):
        build_grid(8)
    with pytest.raises(ConfigurationError):
        build_grid(64, 0.0)
    with pytest.raises(ConfigurationError):
        build_grid(64, -2.0)


def test_nodes_and_weights(grid):
    assert np.all(grid.nodes > 0)
    assert np.all(np.diff(grid.nodes) > 0)
    assert np.all(grid.weights_plain > 0)
    assert np.all(grid.weights_r5 > 0)
    assert grid.N == grid.n + 1


def test_grid_is_read_only(grid):
    with pytest.raises(ValueError):
        grid.nodes[0] = 1.0


def test_clenshaw_curtis_polynomial_exactness():
    for N in (8, 9, 32):
        w = clenshaw_curtis_weights(N)
        u = -np.cos(np.pi * np.arange(N + 1) / N)
        for p in range(0, N + 1, 2):
            assert np.dot(w, u ** p) == pytest.approx(2.0 / (p + 1), abs=1e-13)


def test_cheb_diff_matrix_on_polynomials():
    N = 20
    D = cheb_diff_matrix(N)
    u = -np.cos(np.pi * np.arange(N + 1) / N)
    np.testing.assert_allclose(D @ u ** 5, 5 * u ** 4, atol=1e-11)


def test_d1_constant_and_linear(grid64, grid):
    assert np.max(np.abs(grid64.d1 @ np.ones(grid64.n))) <= 1e-10
    for g in (grid64, grid):
        assert np.max(np.abs(g.d1 @ g.nodes - 1.0)) <= 1e-10


def test_d1_constant_roundoff_floor(grid):
    # float64 matvec rounding near the origin, about eps * sum |d1_ij|
    assert np.max(np.abs(grid.d1 @ np.ones(grid.n))) <= 1e-9


def test_differentiate_omega(grid):
    d = differentiate(grid.sample(eval_omega), 1)
    assert np.max(np.abs(d.values - eval_omega_prime(grid.nodes))) <= 1e-8


def test_differentiate_constant(grid64):
    d = differentiate(RadialFunction(grid64, np.full(grid64.n, 3.0)), 1)
    assert np.max(np.abs(d.values)) <= 1e-10


def test_second_derivative_of_r_squared(grid64):
    d = differentiate(grid64.sample(lambda r: r ** 2), 2)
    assert np.max(np.abs(d.values - 2.0)) <= 1e-8


def test_second_derivative_roundoff_growth():
    # the global differentiation floor grows like eps N^4 near the origin
    errs = []
    for n in (64, 128, 256):
        g = build_grid(n)
        errs.append(np.max(np.abs(g.d2 @ g.nodes ** 2 - 2.0)))
    assert errs[0] <= 1e-8
    assert errs[-1] <= 1e-5


def test_differentiate_order_error(grid64):
    with pytest.raises(UsageError):
        differentiate(grid64.sample(eval_omega), 3)


def test_weighted_inner_product_omega(grid):
    w = grid.sample(eval_omega)
    # c^2 int r^5 (1+r^2)^{-4} dr = c^2 B(3, 1)/2 = c^2/6
    exact = C_OMEGA ** 2 * beta(3, 1) / 2
    assert exact == pytest.approx(24 / math.pi ** 3, rel=1e-14)
    assert weighted_inner_product(w, w) == pytest.approx(exact, rel=1e-10)


@pytest.mark.xfail(strict=True, reason="<omega, omega> = c^2/6 = 24/pi^3; the quoted value "
                   "2.4/pi^3 uses the (1+r^2)^{-6} integral instead of (1+r^2)^{-4}")
def test_weighted_inner_product_omega_quoted_value(grid):
    w = grid.sample(eval_omega)
    assert weighted_inner_product(w, w) == pytest.approx(0.0774045, rel=1e-6)


def test_weighted_inner_product_sign_changing(grid):
    w = grid.sample(eval_omega)
    lw = grid.sample(eval_lambda_omega)
    # 2 c^2 int r^5 (1 - r^2)(1+r^2)^{-5} dr via beta integrals
    exact = 2 * C_OMEGA ** 2 * (beta(3, 2) - beta(4, 1)) / 2
    oracle = integrate.quad(lambda r: eval_omega(r) * eval_lambda_omega(r) * r ** 5, 0, np.inf,
                            epsabs=0, epsrel=1e-13, limit=200)[0]
    assert exact == pytest.approx(oracle, rel=1e-10)
    assert weighted_inner_product(w, lw) == pytest.approx(exact, rel=1e-8)


def test_inner_product_zero_and_mismatch(grid, grid64):
    z = RadialFunction(grid, np.zeros(grid.n))
    assert weighted_inner_product(z, grid.sample(eval_omega)) == 0.0
    with pytest.raises(UsageError):
        weighted_inner_product(grid.sample(eval_omega), grid64.sample(eval_omega))
    with pytest.raises(UsageError):
        RadialFunction(grid, np.zeros(3))


def test_quadrature_beta_surrogates(grid):
    w5 = grid.weights_r5
    r = grid.nodes
    assert np.dot(w5, (1 + r ** 2) ** -6) == pytest.approx(1 / 60, rel=1e-10)
    assert np.dot(w5, (1 + r ** 2) ** -4) == pytest.approx(1 / 6, rel=1e-10)
    assert 1 / 60 == pytest.approx(beta(3, 3) / 2)
    assert 1 / 6 == pytest.approx(beta(3, 1) / 2)


def test_parseval_against_angular_quadrature(grid):
    # int_{R^6} |f|^2 dx = |S^4| int int f(s)^2 s^5 sin^4 dtheta ds
    f = lambda s: np.exp(-s * s) * (1 + s)
    val = integrate.dblquad(lambda th, s: f(s) ** 2 * s ** 5 * np.sin(th) ** 4, 0, np.inf, 0, np.pi,
                            epsabs=0, epsrel=1e-12)[0]
    fg = grid.sample(f)
    assert math.pi ** 3 * weighted_norm(fg) ** 2 == pytest.approx(AREA_S4 * val, rel=1e-9)


def test_radial_function_arithmetic(grid64):
    a = grid64.sample(eval_omega)
    b = 2 * a - a / 2 + 1
    np.testing.assert_allclose(b.values, 1.5 * a.values + 1)
    np.testing.assert_allclose((-a).values, -a.values)
    assert len(a) == 64
    with pytest.raises(UsageError):
        a + build_grid(64).sample(eval_omega)


def test_interpolant_reproduces_omega(grid):
    f = interpolant(grid.sample(eval_omega))
    r = np.array([0.0, 0.013, 0.37, 1.0, 2.9, 40.0, 1e4])
    np.testing.assert_allclose(f(r), eval_omega(r), rtol=1e-9)
    assert f(grid.nodes[10]) == pytest.approx(eval_omega(grid.nodes[10]), rel=1e-14)


def test_map_scale_moves_nodes():
    g1, g2 = build_grid(32, 1.0), build_grid(32, 3.0)
    np.testing.assert_allclose(g2.nodes, 3 * g1.nodes, rtol=1e-14)
    np.testing.assert_allclose(g2.weights_plain, 3 * g1.weights_plain, rtol=1e-12)
