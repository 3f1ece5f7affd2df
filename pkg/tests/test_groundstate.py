import math

import numpy as np
import pytest

from hartree6 import CONSTANTS, DomainError, RadialProfile
from hartree6.groundstate import (
    C_HARTREE,
    C_OMEGA,
    eval_lambda_omega,
    eval_omega,
    eval_omega_prime,
    eval_omega_second,
    eval_omega_squared,
    profile,
    radial_laplacian_omega,
    radial_laplacian_omega_exact,
)

PI15 = math.pi ** 1.5


def test_constants_product_is_24():
    assert CONSTANTS.c_omega * CONSTANTS.c_hartree == pytest.approx(24.0, rel=1e-15)
    assert CONSTANTS.newton_product == pytest.approx(24.0, rel=1e-15)
    assert CONSTANTS.vol_s5 == pytest.approx(math.pi ** 3)
    assert CONSTANTS.vol_s5 > 0


def test_omega_examples():
    assert eval_omega(0.0) == pytest.approx(12 / PI15, rel=1e-15)
    assert eval_omega(0.0) == pytest.approx(2.155055, rel=1e-5)
    assert eval_omega(1.0) == pytest.approx(3 / PI15, rel=1e-15)
    assert eval_omega(1.0) == pytest.approx(0.538764, rel=1e-5)
    # c r^{-4} asymptotics: the ratio at r = 100 is (1 + 1e-4)^{-2}, a 2e-4 gap
    assert eval_omega(100.0) / (12 / PI15 * 1e-8) == pytest.approx((1 + 1e-4) ** -2, rel=1e-14)
    assert abs(eval_omega(100.0) / (12 / PI15 * 1e-8) - 1) < 2.5e-4


def test_omega_prime_examples():
    assert eval_omega_prime(0.0) == 0.0
    assert eval_omega_prime(1.0) == pytest.approx(-6 / PI15, rel=1e-15)
    assert eval_omega_prime(1.0) == pytest.approx(-1.077527, rel=1e-5)
    r = np.geomspace(1e-6, 1e6, 200)
    assert np.all(eval_omega_prime(r) < 0)
    assert np.all(eval_omega(r) > 0)


def test_derivatives_match_finite_differences():
    r = np.array([0.1, 0.5, 1.0, 2.0, 7.0])
    h = 1e-5
    fd1 = (eval_omega(r + h) - eval_omega(r - h)) / (2 * h)
    fd2 = (eval_omega_prime(r + h) - eval_omega_prime(r - h)) / (2 * h)
    np.testing.assert_allclose(eval_omega_prime(r), fd1, rtol=1e-8)
    np.testing.assert_allclose(eval_omega_second(r), fd2, rtol=1e-8)


def test_pde_identity_exact_terms(grid):
    r = np.concatenate([[0.0], grid.nodes])
    rhs = C_HARTREE * eval_omega_squared(r)
    err = np.abs(radial_laplacian_omega_exact(r) - rhs) / rhs
    assert err.max() <= 1e-12


def test_pde_identity_float_terms_moderate_radii():
    # the float sum cancels like eps r^2 at large r; below r = 100 it is clean
    r = np.linspace(0.0, 100.0, 1001)
    rhs = C_HARTREE * eval_omega_squared(r)
    err = np.abs(radial_laplacian_omega(r) - rhs) / rhs
    assert err.max() <= 1e-11


def test_lambda_omega_generator_is_scaling_derivative():
    r = np.linspace(0, 5, 51)
    lam = 1e-6
    fd = ((1 + lam) ** 2 * eval_omega((1 + lam) * r) - (1 - lam) ** 2 * eval_omega((1 - lam) * r)) / (2 * lam)
    np.testing.assert_allclose(eval_lambda_omega(r), fd, rtol=1e-8, atol=1e-9)
    np.testing.assert_allclose(eval_lambda_omega(r), 2 * eval_omega(r) + r * eval_omega_prime(r), rtol=1e-13,
                               atol=1e-15)


def test_lambda_omega_doubled_convention_examples():
    f = lambda r: eval_lambda_omega(r, convention="doubled")
    assert f(0.0) == pytest.approx(24 / PI15, rel=1e-15)
    assert f(0.0) == pytest.approx(4.310110, rel=1e-5)
    assert abs(f(1 / math.sqrt(3))) < 1e-15
    assert f(1.0) == pytest.approx(-6 / PI15, rel=1e-14)
    r = np.linspace(0, 5, 51)
    np.testing.assert_allclose(f(r), 2 * eval_omega(r) + 2 * r * eval_omega_prime(r), rtol=1e-13, atol=1e-15)


def test_lambda_omega_changes_sign_once():
    r = np.linspace(1e-3, 50, 20001)
    for conv, root in (("generator", 1.0), ("doubled", 1 / math.sqrt(3))):
        v = eval_lambda_omega(r, convention=conv)
        flips = np.nonzero(np.diff(np.sign(v)))[0]
        assert len(flips) == 1
        assert r[flips[0]] <= root <= r[flips[0] + 1]
    assert eval_lambda_omega(0.0) == pytest.approx(2 * C_OMEGA)


def test_lambda_omega_unknown_convention():
    with pytest.raises(DomainError):
        eval_lambda_omega(1.0, convention="other")


@pytest.mark.parametrize("bad", [-1.0, float("nan"), float("inf"), [0.5, -0.1]])
def test_domain_errors(bad):
    for fn in (eval_omega, eval_omega_prime, eval_omega_second, eval_lambda_omega):
        with pytest.raises(DomainError):
            fn(bad)


def test_profile_enum_dispatch():
    r = np.array([0.0, 0.3, 2.0])
    np.testing.assert_array_equal(RadialProfile.OMEGA(r), eval_omega(r))
    np.testing.assert_array_equal(profile(RadialProfile.OMEGA_PRIME)(r), eval_omega_prime(r))
    np.testing.assert_array_equal(RadialProfile.OMEGA_SQUARED(r), eval_omega(r) ** 2)
    np.testing.assert_array_equal(RadialProfile.LAMBDA_OMEGA(r), eval_lambda_omega(r))


def test_scalar_and_array_outputs():
    assert isinstance(eval_omega(1.0), float)
    assert eval_omega(np.ones(3)).shape == (3,)


@pytest.mark.xfail(strict=True, reason="(1 + 100^2)^{-2} differs from 100^{-4} by 2e-4, not 1e-4")
def test_omega_far_field_within_one_basis_point():
    assert eval_omega(100.0) == pytest.approx(12 / PI15 * 1e-8, rel=1e-4)
