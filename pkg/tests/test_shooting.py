import math
from types import SimpleNamespace

import numpy as np
import pytest

import hartree6.shooting as shooting_mod
from hartree6 import PreconditionError, StiffnessError, UsageError, check_bounds, shoot_frak_L0
from hartree6.families import random_positive_profile
from hartree6.groundstate import eval_omega
from hartree6.operator import apply_mode_operator, assemble_frak_l0, rank_one_functional
from hartree6.shooting import bound_i_rhs, bound_ii_rhs, collocation_residual


@pytest.fixture(scope="module")
def traj():
    return shoot_frak_L0(1.0, 50.0, rtol=1e-10)


def test_frobenius_start(traj):
    phi = traj.state(np.array([0.1]))[0][0]
    assert phi == pytest.approx(0.98, abs=1e-3)
    assert traj.phi[0] == 1.0 and traj.dphi[0] == 0.0


def test_lambda_at_origin(traj):
    assert traj.lam[0] == 2.0
    assert traj.lam[1] == pytest.approx(2.0, abs=1e-2)


def test_min_phi_and_sign(traj):
    assert traj.phi.min() > 0.25
    assert np.all(traj.phi > 0)


def test_moments_monotone(traj):
    assert np.all(np.diff(traj.m_a) >= 0)
    assert np.all(np.diff(traj.m_b) >= 0)


def test_linearity(traj):
    neg = shoot_frak_L0(-3.0, 50.0, rtol=1e-10)
    np.testing.assert_allclose(neg.phi, -3 * traj.phi, rtol=1e-9)
    np.testing.assert_allclose(neg.lam, traj.lam, rtol=1e-9)


@pytest.mark.parametrize("phi0, r_max", [(0.0, 10.0), (float("nan"), 10.0), (1.0, 0.0), (1.0, -5.0)])
def test_preconditions(phi0, r_max):
    with pytest.raises(PreconditionError):
        shoot_frak_L0(phi0, r_max)


def test_bad_mesh():
    with pytest.raises(UsageError):
        shoot_frak_L0(1.0, 5.0, mesh=[0.1, 1.0])


def test_stiffness_error(monkeypatch):
    def stalled(fun, span, y0, **kw):
        return SimpleNamespace(status=-1, t=np.array([span[0], 0.3]), message="step size too small")

    monkeypatch.setattr(shooting_mod, "solve_ivp", stalled)
    with pytest.raises(StiffnessError):
        shoot_frak_L0(1.0, 10.0)


def test_bound_rhs_examples():
    assert bound_i_rhs(1.0) == pytest.approx(1.8 + 2.4 - 2.4 * math.log(2), rel=1e-15)
    assert bound_i_rhs(1.0) == pytest.approx(2.536, abs=1e-3)
    assert bound_ii_rhs(2.0) == 17.0


def test_all_bounds_pass(traj):
    rep = check_bounds(traj)
    assert rep.all_passed, rep.passed
    assert rep.min_slack_iii > 0.2
    assert all(len(v) == 0 for v in rep.violations().values())


def test_bounds_need_positive_start():
    with pytest.raises(PreconditionError):
        check_bounds(shoot_frak_L0(-1.0, 5.0))


def test_unweighted_variant_fails(traj):
    # dropping omega(r) from the moment term breaks the growth bound
    rep = check_bounds(shoot_frak_L0(1.0, 50.0, rtol=1e-10, omega_weighted=False))
    assert not rep.passed["bound_i"]


def test_tolerance_refinement():
    a = shoot_frak_L0(1.0, 50.0, rtol=1e-10)
    b = shoot_frak_L0(1.0, 50.0, rtol=5e-11)
    assert abs(a.phi[-1] - b.phi[-1]) / abs(b.phi[-1]) < 10 * 1e-10


def test_collocation_consistency(grid):
    mesh = np.concatenate([[0.0], grid.nodes])
    tr = shoot_frak_L0(1.0, grid.nodes[-1] * 1.0000001, rtol=1e-13, atol=1e-16,
                       mesh=np.concatenate([mesh[:-1], [grid.nodes[-1] * 1.0000001]]))
    assert collocation_residual(tr, grid) <= 1e-5


def test_collocation_needs_coverage(grid, traj):
    with pytest.raises(UsageError):
        collocation_residual(traj, grid)


def test_decomposition_identity(grid, ops, rng):
    frak = assemble_frak_l0(grid)
    v = rank_one_functional(grid)
    om = eval_omega(grid.nodes)
    for _ in range(10):
        phi = grid.sample(random_positive_profile(rng))
        # local and nonlocal parts applied separately; summing the matrices
        # first adds rounding of order eps * |a_local| near the origin
        lhs = apply_mode_operator(ops(0), phi).values
        rhs = (frak.a_local @ phi.values + frak.a_nonlocal @ phi.values
               - 2 * math.pi ** 3 * om * (v @ phi.values))
        assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.max(np.abs(lhs))
