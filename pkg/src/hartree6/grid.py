"""Mapped Chebyshev discretization of the half line (0, inf).

Chebyshev-Gauss-Lobatto points u_j = -cos(j pi / N), j = 0..N, are mapped by
the algebraic map r = L (1+u)/(1-u) = L cot^2(theta/2).  The endpoints u = -1
(r = 0) and u = 1 (r = inf) are not stored; they carry boundary conditions
imposed by :mod:`hartree6.operator`.  The n = N - 1 stored nodes therefore sit
uniformly in theta, which is also the coordinate used for product integration
in :mod:`hartree6.potential`.

Derivatives at the stored nodes interpolate g = (1-u)^2 f by the polynomial
through the interior nodes.  This ansatz allows f to tend to a constant at
infinity, so constants, r and r^2 are differentiated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, UsageError

__all__ = [
    "RadialGrid",
    "RadialFunction",
    "build_grid",
    "weighted_inner_product",
    "weighted_norm",
    "differentiate",
    "clenshaw_curtis_weights",
    "cheb_diff_matrix",
    "interpolant",
    "decaying_derivative_matrix",
]

MIN_NODES = 16


def _cgl_angles(N):
    """Angles theta_j = pi (N - j)/N so that u_j = cos(theta_j) ascends."""
    return np.pi * (N - np.arange(N + 1)) / N


def cheb_diff_matrix(N):
    """Chebyshev-Gauss-Lobatto differentiation matrix, ascending nodes.

    Node differences use the trigonometric product form and the diagonal is
    the negative row sum, which keeps roundoff at O(eps N^2).
    """
    th = _cgl_angles(N)
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    dx = 2.0 * np.sin((th[None, :] + th[:, None]) / 2) * np.sin((th[None, :] - th[:, None]) / 2)
    np.fill_diagonal(dx, 1.0)
    D = np.outer(c, 1.0 / c) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def _interior_diff_matrix(N):
    """Differentiation matrix of the polynomial through the N-1 interior CGL nodes.

    The interior nodes are the zeros of U_{N-1}; their barycentric weights are
    proportional to (-1)^j sin^2(theta_j).
    """
    th = _cgl_angles(N)[1:-1]
    lam = (-1.0) ** np.arange(1, N) * np.sin(th) ** 2
    dx = -2.0 * np.sin((th[:, None] + th[None, :]) / 2) * np.sin((th[:, None] - th[None, :]) / 2)
    np.fill_diagonal(dx, 1.0)
    D = (lam[None, :] / lam[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def clenshaw_curtis_weights(N):
    """Clenshaw-Curtis weights on the ascending CGL nodes u_0 < ... < u_N."""
    th = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    inner = th[1:-1]
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        kk = np.arange(1, N // 2)
        v -= (2.0 * np.cos(2.0 * np.outer(inner, kk)) / (4.0 * kk * kk - 1)).sum(axis=1)
        v -= np.cos(N * inner) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / N ** 2
        kk = np.arange(1, (N - 1) // 2 + 1)
        v -= (2.0 * np.cos(2.0 * np.outer(inner, kk)) / (4.0 * kk * kk - 1)).sum(axis=1)
    w[1:-1] = 2.0 * v / N
    return w[::-1].copy()


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Collocation grid on (0, inf) with quadrature and derivative data.

    Attributes
    ----------
    n : int
        Number of stored (interior) nodes.
    map_scale : float
        Length scale L of the algebraic map.
    nodes : ndarray
        Strictly increasing radii r_1 < ... < r_n.
    weights_plain, weights_r5 : ndarray
        Quadrature weights for int f dt and int f r^5 dr.
    d1, d2 : ndarray
        First and second derivative matrices at the stored nodes.
    theta : ndarray
        Map angles of the stored nodes, r = L cot^2(theta/2).
    u_full : ndarray
        All N + 1 CGL points including the endpoints.
    D_full : ndarray
        CGL differentiation matrix on ``u_full``.
    """

    n: int
    map_scale: float
    nodes: np.ndarray
    weights_plain: np.ndarray
    weights_r5: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    theta: np.ndarray
    u_full: np.ndarray
    D_full: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def N(self):
        """Polynomial degree of the underlying CGL grid (n + 1)."""
        return self.n + 1

    @property
    def r(self):
        return self.nodes

    def function(self, values):
        """Wrap node values as a :class:`RadialFunction` on this grid."""
        return RadialFunction(self, values)

    def sample(self, evaluator):
        """Evaluate a closed-form radial profile at the nodes."""
        return RadialFunction(self, np.asarray(evaluator(self.nodes), dtype=float))

    def cached(self, key, factory):
        """Memoize derived data (e.g. product-integration weights) on the grid."""
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def parameters(self):
        return {"n": self.n, "map_scale": self.map_scale}


def build_grid(n=256, map_scale=1.0):
    """Build the mapped Chebyshev grid with ``n`` stored nodes.

    Parameters
    ----------
    n : int
        Stored node count, at least 16.  The CGL degree is N = n + 1.
    map_scale : float
        Positive length scale L of the map r = L (1+u)/(1-u).
    """
    if isinstance(n, bool) or int(n) != n or n < MIN_NODES:
        raise ConfigurationError(f"need an integer n >= {MIN_NODES}, got {n!r}")
    L = float(map_scale)
    if not np.isfinite(L) or L <= 0:
        raise ConfigurationError(f"map_scale must be positive and finite, got {map_scale!r}")
    n = int(n)
    N = n + 1

    th_full = _cgl_angles(N)
    u_full = np.cos(th_full)
    theta = th_full[1:-1]
    # L cot^2(theta/2) avoids the cancellation in (1+u) near the origin
    r = L / np.tan(theta / 2) ** 2
    one_minus_u = 2.0 * np.sin(theta / 2) ** 2

    w_u = clenshaw_curtis_weights(N)[1:-1]
    weights_plain = w_u * 2.0 * L / one_minus_u ** 2
    weights_r5 = weights_plain * r ** 5

    Di = _interior_diff_matrix(N)
    T = one_minus_u ** 2
    d1 = (Di * T[None, :] + np.diag(2.0 * one_minus_u)) / (2.0 * L)
    DiT = Di * T[None, :]
    d2 = (T[:, None] * (Di @ DiT) + 2.0 * one_minus_u[:, None] * DiT + np.diag(2.0 * T)) / (4.0 * L * L)

    arrays = [r, weights_plain, weights_r5, d1, d2, theta, u_full]
    D_full = cheb_diff_matrix(N)
    for a in arrays + [D_full]:
        a.setflags(write=False)
    return RadialGrid(n, L, r, weights_plain, weights_r5, d1, d2, theta, u_full, D_full)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Values of a radial profile at the nodes of a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise UsageError(f"expected {self.grid.n} values, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _check(self, other):
        if isinstance(other, RadialFunction):
            if other.grid is not self.grid:
                raise UsageError("radial functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return RadialFunction(self.grid, self.values + self._check(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RadialFunction(self.grid, self.values - self._check(other))

    def __rsub__(self, other):
        return RadialFunction(self.grid, self._check(other) - self.values)

    def __mul__(self, other):
        return RadialFunction(self.grid, self.values * self._check(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RadialFunction(self.grid, self.values / self._check(other))

    def __neg__(self):
        return RadialFunction(self.grid, -self.values)

    def __len__(self):
        return self.grid.n

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _same_grid(f, g):
    if not isinstance(f, RadialFunction) or not isinstance(g, RadialFunction):
        raise UsageError("expected RadialFunction arguments")
    if f.grid is not g.grid:
        raise UsageError("radial functions live on different grids")
    return f.grid


def weighted_inner_product(f, g):
    """<f, g> = int_0^inf f g r^5 dr on the common grid."""
    grid = _same_grid(f, g)
    return float(np.dot(f.values * g.values, grid.weights_r5))


def weighted_norm(f):
    """sqrt(<f, f>)."""
    return float(np.sqrt(weighted_inner_product(f, f)))


def differentiate(f, order=1):
    """First or second radial derivative at the stored nodes."""
    if not isinstance(f, RadialFunction):
        raise UsageError("expected a RadialFunction")
    if order == 1:
        return RadialFunction(f.grid, f.grid.d1 @ f.values)
    if order == 2:
        return RadialFunction(f.grid, f.grid.d2 @ f.values)
    raise UsageError(f"derivative order must be 1 or 2, got {order!r}")


def interpolant(f, decay=4.0):
    """Callable r -> f(r) built from the stored values of a :class:`RadialFunction`.

    The polynomial in u through the interior nodes interpolates
    psi = f (1 + r^2)^{decay/2}, evaluated by the barycentric formula, so a
    profile decaying like r^{-decay} is reproduced uniformly on [0, inf).
    """
    grid = f.grid
    th = grid.theta
    u_nodes = np.cos(th)
    lam = (-1.0) ** np.arange(1, grid.N) * np.sin(th) ** 2
    r_nodes = grid.nodes
    psi = f.values * (1.0 + r_nodes * r_nodes) ** (decay / 2)
    L = grid.map_scale

    def evaluate(r):
        r = np.asarray(r, dtype=float)
        u = (r - L) / (r + L)
        diff = u[..., None] - u_nodes
        exact = diff == 0
        diff = np.where(exact, 1.0, diff)
        c = lam / diff
        val = (c @ psi) / c.sum(axis=-1)
        if np.any(exact):
            val = np.where(exact.any(axis=-1), psi[exact.argmax(axis=-1)], val)
        out = val * (1.0 + r * r) ** (-decay / 2)
        return float(out) if out.ndim == 0 else out

    return evaluate


def decaying_derivative_matrix(grid, decay=4.0):
    """First-derivative matrix suited to profiles decaying like r^{-decay}.

    Differentiates psi = f (1 + r^2)^{decay/2} as a polynomial in u and
    applies the product rule.  Unlike ``grid.d1``, whose error is uniform in
    absolute terms, the error here decays with f.  That matters inside
    r^5-weighted integrals of f'^2.
    """

    def build():
        r = grid.nodes
        Di = _interior_diff_matrix(grid.N)
        u_r = (2.0 * np.sin(grid.theta / 2) ** 2) ** 2 / (2.0 * grid.map_scale)
        env = (1.0 + r * r) ** (-decay / 2)
        d = (u_r * env)[:, None] * Di / env[None, :]
        d[np.diag_indices_from(d)] -= decay * r / (1.0 + r * r)
        d.setflags(write=False)
        return d

    return grid.cached(("decaying_d1", float(decay)), build)
