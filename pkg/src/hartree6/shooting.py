"""Shooting integration of the k = 0 operator without its rank-one part.

The radial equation

    -phi'' - (5/r) phi' - 2 pi^{3/2} omega phi
        - 2 pi^3 omega(r) (m_b(r)/r^4 - m_a(r)) = 0,
    m_a(r) = int_0^r t phi omega dt,  m_b(r) = int_0^r t^5 phi omega dt,

is closed by carrying the two moments as extra unknowns.  The origin is a
regular singular point.  Integration starts at r = eps from the series
phi = phi0 (1 - 2 r^2 + ...), where the coefficient -2 follows from
pi^{3/2} omega(0) = 12.

With lambda = phi~/omega and phi~ = (2 omega(0)/phi0) phi, the checks are
lambda(0) = 2, lambda(r) - 2 >= (9/5) r^4 + (12/5) r^2 - (12/5) log(1+r^2),
lambda(r) >= r^4 + 1 and phi/phi0 >= 1/4, plus the identity
(r^5 omega^2 lambda')' = 2 pi^3 r omega^2 int_0^r (r^4 - t^4) phi~ omega t dt.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp

from .errors import PreconditionError, StiffnessError, UsageError
from .groundstate import C_HARTREE, C_OMEGA, eval_omega, eval_omega_prime

__all__ = [
    "ShootingTrajectory",
    "BoundReport",
    "shoot_frak_L0",
    "check_bounds",
    "bound_i_rhs",
    "bound_ii_rhs",
    "collocation_residual",
    "DEFAULT_EPS",
    "MESH_STEP",
]

PI3 = np.pi ** 3
DEFAULT_EPS = 1e-6
MESH_STEP = 0.05


@dataclass(frozen=True)
class ShootingTrajectory:
    """Solution of the moment-augmented system on an output mesh.

    ``r[0] = 0`` holds the exact initial data; the remaining nodes are the
    integrator's dense output.  ``lam`` is phi~/omega.
    """

    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    m_a: np.ndarray
    m_b: np.ndarray
    lam: np.ndarray
    phi0: float
    rtol: float
    atol: float
    eps: float
    omega_weighted: bool
    runtime_s: float
    nfev: int
    dense: object = field(repr=False, compare=False)

    @property
    def r_max(self):
        return float(self.r[-1])

    def state(self, r):
        """Interpolated (phi, phi', m_a, m_b) at radii r >= eps."""
        return self.dense(r)


def _rhs(omega_weighted):
    def rhs(r, y):
        phi, dphi, ma, mb = y
        w = eval_omega(r)
        coupling = w if omega_weighted else 1.0
        return [
            dphi,
            -5.0 * dphi / r - C_HARTREE * w * phi - 2.0 * PI3 * coupling * (mb / r ** 4 - ma),
            r * phi * w,
            r ** 5 * phi * w,
        ]

    return rhs


def _series_start(phi0, eps):
    w0 = C_OMEGA
    return [
        phi0 * (1.0 - 2.0 * eps ** 2),
        -4.0 * phi0 * eps,
        phi0 * w0 * eps ** 2 / 2.0,
        phi0 * w0 * eps ** 6 / 6.0,
    ]


def shoot_frak_L0(phi0=1.0, r_max=50.0, rtol=1e-10, atol=1e-12, eps=DEFAULT_EPS,
                  mesh_step=MESH_STEP, omega_weighted=True, mesh=None):
    """Integrate the rank-one-free k = 0 equation from the origin.

    Parameters
    ----------
    phi0 : float
        phi(0), nonzero.
    r_max : float
        Right end of the output mesh.
    rtol, atol : float
        DOP853 tolerances.
    omega_weighted : bool
        Keep the factor omega(r) on the moment term (default).  ``False``
        integrates the variant without it, for comparison only.
    mesh : array_like, optional
        Output radii; defaults to 0, mesh_step, ..., r_max.

    Raises
    ------
    PreconditionError
        If phi0 == 0 or r_max <= 0.
    StiffnessError
        If the integrator cannot advance.
    """
    if not np.isfinite(phi0) or phi0 == 0:
        raise PreconditionError("phi0 must be finite and nonzero")
    if not r_max > 0 or not np.isfinite(r_max):
        raise PreconditionError("r_max must be positive and finite")
    if mesh is None:
        m = int(round(r_max / mesh_step))
        mesh = mesh_step * np.arange(m + 1)
        mesh[-1] = r_max
    mesh = np.asarray(mesh, dtype=float)
    if mesh[0] != 0.0 or np.any(np.diff(mesh) <= 0):
        raise UsageError("mesh must start at 0 and increase strictly")
    t0 = time.perf_counter()
    sol = solve_ivp(
        _rhs(omega_weighted), (eps, mesh[-1]), _series_start(float(phi0), eps),
        method="DOP853", rtol=rtol, atol=atol, dense_output=True,
    )
    runtime = time.perf_counter() - t0
    if sol.status != 0:
        raise StiffnessError(f"integration stopped at r = {sol.t[-1]:.6g}: {sol.message}")
    Y = np.empty((4, len(mesh)))
    Y[:, 0] = [phi0, 0.0, 0.0, 0.0]
    Y[:, 1:] = sol.sol(mesh[1:])
    phi = Y[0]
    lam = (2.0 * C_OMEGA / phi0) * phi / eval_omega(mesh)
    lam[0] = 2.0
    return ShootingTrajectory(
        mesh, phi, Y[1], Y[2], Y[3], lam, float(phi0), float(rtol), float(atol), float(eps),
        bool(omega_weighted), runtime, int(sol.nfev), sol.sol,
    )


def bound_i_rhs(r):
    """(9/5) r^4 + (12/5) r^2 - (12/5) log(1 + r^2)."""
    r = np.asarray(r, dtype=float)
    return 1.8 * r ** 4 + 2.4 * r ** 2 - 2.4 * np.log1p(r ** 2)


def bound_ii_rhs(r):
    """r^4 + 1."""
    return np.asarray(r, dtype=float) ** 4 + 1.0


@dataclass(frozen=True)
class BoundReport:
    """Per-node slacks of the growth bounds and the identity residual."""

    r: np.ndarray
    slack_i: np.ndarray
    slack_ii: np.ndarray
    slack_iii: np.ndarray
    identity_residual: np.ndarray
    tolerance: float
    identity_tolerance: float

    @property
    def min_slack_i(self):
        return float(self.slack_i.min())

    @property
    def min_slack_ii(self):
        return float(self.slack_ii.min())

    @property
    def min_slack_iii(self):
        return float(self.slack_iii.min())

    @property
    def max_identity_residual(self):
        return float(np.max(self.identity_residual))

    @property
    def passed(self):
        return {
            "bound_i": bool(np.all(self.slack_i >= -self.tolerance)),
            "bound_ii": bool(np.all(self.slack_ii >= -self.tolerance)),
            "bound_iii": bool(np.all(self.slack_iii >= -self.tolerance)),
            "identity": bool(self.max_identity_residual <= self.identity_tolerance),
        }

    @property
    def all_passed(self):
        return all(self.passed.values())

    def violations(self):
        """Radii where each bound fails."""
        tol = self.tolerance
        return {
            "bound_i": self.r[self.slack_i < -tol],
            "bound_ii": self.r[self.slack_ii < -tol],
            "bound_iii": self.r[self.slack_iii < -tol],
        }


def _identity_terms(traj, r):
    """Q(r) = r^5 omega^2 lambda' from the state, and the integrand of its derivative."""
    phi, dphi, ma, mb = traj.state(r)
    scale = 2.0 * C_OMEGA / traj.phi0
    w, wp = eval_omega(r), eval_omega_prime(r)
    q = scale * r ** 5 * (dphi * w - phi * wp)
    # the identity as stated, with omega^2, whichever variant was integrated
    dq = 2.0 * PI3 * r * w * w * scale * (r ** 4 * ma - mb)
    return q, dq


def check_bounds(traj, tolerance=1e-6, identity_tolerance=1e-8, gauss_points=16):
    """Evaluate the growth bounds and the identity at every node with r > 0.

    The identity is tested in integrated form: the value of r^5 omega^2 lambda'
    read off the state is compared with the Gauss-Legendre integral of the
    right-hand side, accumulated interval by interval on the mesh.  The
    residual is relative to max|r^5 omega^2 lambda'| over the mesh.
    """
    if traj.phi0 <= 0:
        raise PreconditionError("bounds are stated for phi0 > 0")
    r = traj.r[1:]
    lam = traj.lam[1:]
    slack_i = lam - 2.0 - bound_i_rhs(r)
    slack_ii = lam - bound_ii_rhs(r)
    slack_iii = traj.phi[1:] / traj.phi0 - 0.25

    gx, gw = leggauss(gauss_points)
    edges = np.concatenate([[traj.eps], r])
    a, b = edges[:-1], edges[1:]
    pts = 0.5 * (b - a)[:, None] * gx[None, :] + 0.5 * (a + b)[:, None]
    _, dq = _identity_terms(traj, pts.ravel())
    pieces = (dq.reshape(pts.shape) * gw[None, :]).sum(axis=1) * 0.5 * (b - a)
    q_eps, _ = _identity_terms(traj, np.array([traj.eps]))
    integrated = q_eps[0] + np.cumsum(pieces)
    q, _ = _identity_terms(traj, r)
    resid = np.abs(q - integrated) / np.max(np.abs(q))
    return BoundReport(traj.r[1:], slack_i, slack_ii, slack_iii, resid, tolerance, identity_tolerance)


def collocation_residual(traj, grid, r_check=None):
    """Residual of the grid discretization applied to the shot solution.

    phi is read from the trajectory at the grid nodes (which the trajectory
    must cover).  Derivatives use ``grid.d1`` and ``grid.d2``, which allow a
    nonzero limit at infinity.  The moments come from the product-integration
    cells.  Returns max |residual| / max |2 pi^{3/2} omega phi| over nodes
    with r <= r_check (default r_max / 2).
    """
    from .operator import _moment_matrices

    r = grid.nodes
    if traj.r_max < r[-1]:
        raise UsageError("trajectory does not cover the grid")
    phi = traj.state(r)[0]
    w = eval_omega(r)
    m_a, m_b, _ = _moment_matrices(grid)
    lap = grid.d2 @ phi + 5.0 / r * (grid.d1 @ phi)
    coupling = w if traj.omega_weighted else 1.0
    res = -lap - C_HARTREE * w * phi - 2.0 * PI3 * coupling * (m_b @ phi / r ** 4 - m_a @ phi)
    if r_check is None:
        r_check = traj.r_max / 2
    sel = r <= r_check
    return float(np.max(np.abs(res[sel])) / np.max(np.abs(C_HARTREE * w[sel] * phi[sel])))

