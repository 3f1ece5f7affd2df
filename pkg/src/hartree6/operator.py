"""Mode operators of the linearized Hartree operator.

Restricted to functions f(r) Y_k with Y_k a degree-k harmonic, the linearized
operator acts as

    L_k f = -f'' - (5/r) f' + k(k+4)/r^2 f - 2 pi^{3/2} omega f
            - 2 omega(r) int_0^inf K_k(t, r) omega(t) f(t) dt

on L^2((0, inf), r^5 dr).  The local part is discretized by collocation on the
full Chebyshev-Gauss-Lobatto grid with the boundary values eliminated:
f'(0) = 0 for k = 0, f(0) = 0 for k >= 1 and f(inf) = 0 for all k.  The
nonlocal part uses the product-integration matrix of
:mod:`hartree6.potential`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import PreconditionError, UsageError
from .grid import RadialFunction, RadialGrid, decaying_derivative_matrix, interpolant
from .groundstate import C_HARTREE, eval_omega
from .potential import ModeKernel, _apply_prefix, _weights, mode_potential_matrix

__all__ = [
    "ModeOperator",
    "assemble_mode_operator",
    "assemble_frak_l0",
    "apply_mode_operator",
    "quadratic_form",
    "energy_form",
    "monotonicity_gap",
    "MonotonicityGap",
    "monotonicity_gaps",
    "rank_one_functional",
    "centrifugal_gap",
]

PI3 = np.pi ** 3


def _local_matrix(grid, k):
    """Collocation matrix of -d^2/dr^2 - (5/r) d/dr + k(k+4)/r^2 - 2 pi^{3/2} omega."""
    N, L = grid.N, grid.map_scale
    D = grid.D_full
    one_minus_u = np.empty(N + 1)
    one_minus_u[1:-1] = 2.0 * np.sin(grid.theta / 2) ** 2
    one_minus_u[0], one_minus_u[-1] = 2.0, 0.0
    u_r = one_minus_u ** 2 / (2.0 * L)
    u_rr = -one_minus_u ** 3 / (2.0 * L * L)
    r = grid.nodes

    rows = slice(1, N)
    Dr = D[rows]
    D2r = Dr @ D
    a = (-(u_r[rows] ** 2)[:, None] * D2r
         - (u_rr[rows] + 5.0 * u_r[rows] / r)[:, None] * Dr)
    # extension from stored values to all N+1 nodes; f(inf) = 0 always
    ext = np.zeros((N + 1, N - 1))
    ext[1:-1] = np.eye(N - 1)
    if k == 0:
        # Neumann at the origin: D[0] f = 0 solved for f_0
        ext[0] = -D[0, 1:-1] / D[0, 0]
    a = a @ ext
    a[np.diag_indices_from(a)] += k * (k + 4) / r ** 2 - C_HARTREE * eval_omega(r)
    return a


def _symmetrize(grid, a):
    sw = np.sqrt(grid.weights_r5)
    S = sw[:, None] * a / sw[None, :]
    scale = np.max(np.abs(S))
    defect = float(np.max(np.abs(S - S.T)) / scale) if scale > 0 else 0.0
    return 0.5 * (S + S.T), defect


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Assembled discretization of L_k on a grid.

    Attributes
    ----------
    k : int
        Harmonic degree.
    grid : RadialGrid
    a_local, a_nonlocal, a_total : ndarray
        Local part, nonlocal part and their sum (n x n, acting on node values).
    s_sym : ndarray
        (S + S^T)/2 for S = W^{1/2} a_total W^{-1/2}, W = diag(weights_r5).
    symmetry_defect : float
        max|S - S^T| / max|S| before symmetrization.  Collocation is not a
        Galerkin method, so this is O(1); eigenproblems use ``a_total``.
    rank_one_removed : bool
        True for the k = 0 operator without its rank-one part (see
        :func:`assemble_frak_l0`).
    """

    k: int
    grid: RadialGrid
    a_local: np.ndarray
    a_nonlocal: np.ndarray
    a_total: np.ndarray
    s_sym: np.ndarray = field(repr=False)
    symmetry_defect: float = 0.0
    rank_one_removed: bool = False

    def __matmul__(self, f):
        return apply_mode_operator(self, f)


def assemble_mode_operator(k, grid):
    """Assemble L_k on ``grid``.

    The centrifugal coefficient is exactly k(k+4), the Laplace-Beltrami
    eigenvalue of degree-k harmonics on S^5.
    """
    ModeKernel(k)
    k = int(k)
    a_local = _local_matrix(grid, k)
    om = eval_omega(grid.nodes)
    a_nonlocal = -2.0 * om[:, None] * mode_potential_matrix(grid, k) * om[None, :]
    a_total = a_local + a_nonlocal
    s_sym, defect = _symmetrize(grid, a_total)
    return ModeOperator(k, grid, a_local, a_nonlocal, a_total, s_sym, defect)


def _moment_matrices(grid):
    """Matrices of m_a(r) = int_0^r t omega f dt and m_b(r) = int_0^r t^5 omega f dt.

    Built from the k = 0 product-integration cells, accumulated from the
    origin for both moments.
    """
    W = _weights(grid, 0)
    N, n = grid.N, grid.n
    lo = np.zeros((N + 1, n))
    up = np.zeros((N + 1, n))
    rows = np.repeat(np.arange(N + 1), W.stencil.shape[1])
    np.add.at(lo, (rows, W.stencil.ravel()), W.lower.ravel())
    np.add.at(up, (rows, W.stencil.ravel()), W.upper.ravel())
    lo[0] = up[0] = 0.0
    # the cell weights integrate t^a E_0 psi with psi = g / E_0 and g = omega f
    scale = eval_omega(grid.nodes) / W.envelope
    m_b = np.cumsum(lo, axis=0)[1:N] * scale[None, :]
    m_a = np.cumsum(up, axis=0)[1:N] * scale[None, :]
    total_a = up.sum(axis=0) * scale
    return m_a, m_b, total_a


def assemble_frak_l0(grid):
    """The k = 0 operator with its rank-one part removed.

    Acts as -phi'' - (5/r) phi' - 2 pi^{3/2} omega phi
    - 2 pi^3 omega(r) (m_b(r)/r^4 - m_a(r)), so that
    L_0 phi = (this) phi - 2 pi^3 omega(r) int_0^inf phi omega t dt.
    """
    a_local = _local_matrix(grid, 0)
    r = grid.nodes
    om = eval_omega(r)
    m_a, m_b, _ = _moment_matrices(grid)
    a_nonlocal = -2.0 * PI3 * om[:, None] * (m_b / r[:, None] ** 4 - m_a)
    a_total = a_local + a_nonlocal
    s_sym, defect = _symmetrize(grid, a_total)
    return ModeOperator(0, grid, a_local, a_nonlocal, a_total, s_sym, defect, True)


def rank_one_functional(grid):
    """Row vector v with v @ phi = int_0^inf phi(t) omega(t) t dt."""
    return _moment_matrices(grid)[2]


def _vals(op, f):
    if isinstance(f, RadialFunction):
        if f.grid is not op.grid:
            raise UsageError("function and operator live on different grids")
        return f.values
    v = np.asarray(f, dtype=float)
    if v.shape != (op.grid.n,):
        raise UsageError(f"expected {op.grid.n} values, got shape {v.shape}")
    return v


def apply_mode_operator(op, f, dense=False):
    """L_k f at the grid nodes.

    The nonlocal part uses the O(n) prefix-sum path unless ``dense`` is set
    or the operator has its rank-one part removed.
    """
    v = _vals(op, f)
    if dense or op.rank_one_removed:
        return RadialFunction(op.grid, op.a_total @ v)
    om = eval_omega(op.grid.nodes)
    nonlocal_part = -2.0 * om * _apply_prefix(op.grid, op.k, om * v)
    return RadialFunction(op.grid, op.a_local @ v + nonlocal_part)


def quadratic_form(op, f):
    """<L_k f, f> in the r^5 dr inner product."""
    v = _vals(op, f)
    Lf = apply_mode_operator(op, v).values
    return float(np.dot(Lf * v, op.grid.weights_r5))


def energy_form(k, f):
    """Quadratic form of L_k written without second derivatives.

    int (f'^2 + (k(k+4)/r^2 - 2 pi^{3/2} omega) f^2) r^5 dr
    - 2 int int omega f K_k omega f r^5.

    Equal to :func:`quadratic_form` for trial functions, and also meaningful
    for smooth f that do not satisfy the mode-k boundary condition at r = 0.
    """
    grid = f.grid
    r = grid.nodes
    v = f.values
    om = eval_omega(r)
    w5 = grid.weights_r5
    dv = decaying_derivative_matrix(grid) @ v
    local = np.dot(w5, dv * dv + (k * (k + 4) / r ** 2 - C_HARTREE * om) * v * v)
    nonlocal_part = -2.0 * np.dot(w5, om * v * _apply_prefix(grid, int(k), om * v))
    return float(local + nonlocal_part)


def centrifugal_gap(k):
    """k(k+4) - (k-1)(k+3), which simplifies to 2k + 3."""
    return k * (k + 4) - (k - 1) * (k + 3)


@dataclass(frozen=True)
class MonotonicityGap:
    """Two evaluations of Q_k(f) - Q_{k-1}(f) for a positive f."""

    k: int
    direct: float
    closed_form: float
    centrifugal_term: float
    kernel_term: float

    @property
    def relative_difference(self):
        return abs(self.direct - self.closed_form) / abs(self.closed_form)

    @property
    def positive(self):
        return self.direct > 0 and self.closed_form > 0


def _closed_form_gap(ks, fun, r_min, r_max, rtol=1e-12):
    """Positive closed form of Q_k(f) - Q_{k-1}(f) for several degrees at once.

    (2k+3) int f^2 r^3 dr + 8 pi^3 int omega f r^{1-k} int_0^r t^{k+4}
    (r/(k+1) - t/(k+2)) omega f dt dr, integrated as one ODE in s = log r.
    """
    ks = np.asarray(ks, dtype=float)
    m = len(ks)

    def rhs(s, y):
        r = np.exp(s)
        fr = fun(r)
        F = eval_omega(r) * fr
        A, B = y[:m], y[m:2 * m]
        return np.concatenate([
            r ** (ks + 5) * F,
            r ** (ks + 6) * F,
            F * r ** (2 - ks) * (r * A / (ks + 1) - B / (ks + 2)),
            [fr * fr * r ** 4],
        ])

    sol = integrate.solve_ivp(
        rhs, (np.log(r_min), np.log(r_max)), np.zeros(3 * m + 1),
        method="DOP853", rtol=rtol, atol=1e-300,
    )
    if not sol.success:
        raise RuntimeError(f"closed-form gap integration failed: {sol.message}")
    y = sol.y[:, -1]
    return (2.0 * ks + 3.0) * y[-1], 8.0 * PI3 * y[2 * m:3 * m]


def monotonicity_gaps(ks, f, f_exact=None):
    """:func:`monotonicity_gap` for several degrees sharing one adaptive integration."""
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise PreconditionError("monotonicity gap needs k >= 1")
    v = f.values
    if np.any(v < 0) or not np.any(v > 0):
        raise PreconditionError("f must be nonnegative and not identically zero")
    forms = {k: energy_form(k, f) for k in sorted(set(ks) | {k - 1 for k in ks})}
    fun = f_exact if f_exact is not None else interpolant(f)
    L = f.grid.map_scale
    cent, kern = _closed_form_gap(ks, fun, 1e-6 * L, 1e6 * L)
    return [
        MonotonicityGap(k, float(forms[k] - forms[k - 1]), float(c + q), float(c), float(q))
        for k, c, q in zip(ks, cent, kern)
    ]


def monotonicity_gap(k, f, f_exact=None):
    """Q_k(f) - Q_{k-1}(f) evaluated two ways.

    The direct value subtracts two discrete quadratic forms (see
    :func:`energy_form`).  The closed form is an explicit positive expression,
    integrated adaptively from ``f_exact`` or from the grid interpolant of f.

    Raises
    ------
    PreconditionError
        If k < 1, or f has a negative value or vanishes identically.
    """
    if int(k) != k:
        raise PreconditionError("degree must be an integer")
    return monotonicity_gaps([k], f, f_exact)[0]
