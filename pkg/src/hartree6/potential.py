"""Newtonian potential in six dimensions and its mode kernels.

For a function f(|y|) Y_k(y/|y|) the potential int |x-y|^{-4} f Y_k dy equals
Y_k(x/|x|) times int_0^inf K_k(t, |x|) f(t) dt with the separable kernel

    K_k(t, r) = 2 pi^3/(k+2) * t^{k+5}/r^{k+4}   (t < r)
              = 2 pi^3/(k+2) * r^k/t^{k-1}       (t > r).

``apply_mode_potential`` evaluates this by two running sums.  The kink of K_k
at t = r is handled by product integration.  Each cell between consecutive
nodes (uniform in the map angle) is integrated with Gauss-Legendre points,
and the integrand is reconstructed from local Lagrange stencils.  The
reconstruction is applied to psi = f / E_k, where the envelope
E_k(t) = omega(t) (1+t^2)^{-(k+4)/2} removes the algebraic decay.  Without it
the polynomial stencils would have to fit r^{-8} tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .errors import (
    DomainError,
    ExpansionDivergenceError,
    IntegrabilityError,
    ToleranceError,
    UsageError,
)
from .grid import RadialFunction, RadialGrid
from .groundstate import AREA_S4, eval_omega
from .harmonics import GegenbauerTable

__all__ = [
    "ModeKernel",
    "kernel_value",
    "apply_mode_potential",
    "apply_mode_potential_dense",
    "mode_potential_matrix",
    "oracle_potential_direct",
    "expand_kernel",
    "KernelExpansion",
    "expansion_coefficient",
    "expansion_tail_bound",
]

STENCIL_POINTS = 14
CELL_GAUSS_POINTS = 24
GROWTH_BOUND = 1.0e3


@dataclass(frozen=True)
class ModeKernel:
    """Separable kernel K_k with its two power-law branches.

    ``lower`` holds the exponents (a, b) of t^a / r^b used for t < r and
    ``upper`` the exponents of r^a / t^b used for t > r.
    """

    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise DomainError(f"degree must be a nonnegative integer, got {self.k!r}")

    @property
    def prefactor(self):
        return 2.0 * np.pi ** 3 / (self.k + 2)

    @property
    def lower(self):
        return (self.k + 5, self.k + 4)

    @property
    def upper(self):
        return (self.k, self.k - 1)

    def __call__(self, t, r):
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        if np.any(~(t > 0)) or np.any(~(r > 0)):
            raise DomainError("kernel radii must be positive")
        k = self.k
        q = np.minimum(t, r) / np.maximum(t, r)
        # t^{k+5}/r^{k+4} = t (t/r)^{k+4} and r^k/t^{k-1} = t (r/t)^k
        val = self.prefactor * t * np.where(t < r, q ** (k + 4), q ** k)
        return float(val) if val.ndim == 0 else val


def kernel_value(k, t, r):
    """K_k(t, r); both branches agree at t = r."""
    return ModeKernel(k)(t, r)


def _envelope(r, k):
    return eval_omega(r) * (1.0 + r * r) ** (-(k + 4) / 2)


def _lagrange_denominators(p):
    m = np.arange(p)
    diff = m[:, None] - m[None, :]
    np.fill_diagonal(diff, 1)
    return np.prod(diff.astype(float), axis=1)


@dataclass(frozen=True)
class _CellWeights:
    """Product-integration data for one grid and one degree."""

    lower: np.ndarray  # (N+1, p) weights of t^{k+5} E_k psi per cell
    upper: np.ndarray  # (N+1, p) weights of t^{1-k} E_k psi per cell
    stencil: np.ndarray  # (N+1, p) stored-node indices used by each cell
    envelope: np.ndarray  # E_k at the stored nodes
    r_low: np.ndarray  # r^{-(k+4)}
    r_up: np.ndarray  # r^k


def _cell_weights(grid, k, p=STENCIL_POINTS, q=CELL_GAUSS_POINTS):
    N = grid.N
    L = grid.map_scale
    p = min(p, N - 1)
    gx, gw = leggauss(q)
    h = np.pi / N
    cells = np.arange(1, N + 1)
    # cell c spans full-grid index coordinate [c-1, c]; interior nodes are 1..N-1
    start = np.clip(cells - p // 2, 1, N - p)
    stencil = start[:, None] + np.arange(p)[None, :]
    xq = cells[:, None] - 0.5 + 0.5 * gx[None, :]
    theta = np.pi * (N - xq) / N
    half = theta / 2
    rq = L / np.tan(half) ** 2
    jac = L * np.cos(half) / np.sin(half) ** 3 * h
    # omega(t) t^{k+5} (1+t^2)^{-(k+4)/2} written to avoid overflow
    rho = rq / np.sqrt(1.0 + rq * rq)
    base = 0.5 * gw[None, :] * jac * eval_omega(rq)
    f_low = base * rq * rho ** (k + 4)
    f_up = base * rq ** (1 - k) * (1.0 + rq * rq) ** (-(k + 4) / 2)

    pos = xq[:, :, None] - stencil[:, None, :]
    full = np.prod(pos, axis=2, keepdims=True)
    lag = full / pos / _lagrange_denominators(p)[None, None, :]

    lower = np.zeros((N + 1, p))
    upper = np.zeros((N + 1, p))
    lower[1:] = np.einsum("cq,cqm->cm", f_low, lag)
    upper[1:] = np.einsum("cq,cqm->cm", f_up, lag)
    st = np.zeros((N + 1, p), dtype=int)
    st[1:] = stencil - 1  # to stored-node indices 0..n-1

    r = grid.nodes
    return _CellWeights(lower, upper, st, _envelope(r, k), r ** (-(k + 4.0)), r ** float(k))


def _weights(grid, k):
    return grid.cached(("cell_weights", int(k)), lambda: _cell_weights(grid, int(k)))


def _values(f, grid=None):
    if isinstance(f, RadialFunction):
        if grid is not None and f.grid is not grid:
            raise UsageError("radial function lives on a different grid")
        return f.grid, f.values
    if grid is None:
        raise UsageError("plain arrays need an explicit grid")
    v = np.asarray(f, dtype=float)
    if v.shape != (grid.n,):
        raise UsageError(f"expected {grid.n} values, got shape {v.shape}")
    return grid, v


def _check_integrability(grid, v):
    scale = np.max(np.abs(v))
    if scale == 0:
        return
    growth = abs(v[-1]) * grid.nodes[-1] ** 6 / scale
    if not np.isfinite(growth) or growth > GROWTH_BOUND:
        raise IntegrabilityError(
            f"|f(r_n)| r_n^6 / max|f| = {growth:.3e} exceeds {GROWTH_BOUND:g}; "
            "input does not decay fast enough"
        )


def _apply_prefix(grid, k, v):
    W = _weights(grid, k)
    N = grid.N
    psi = v / W.envelope
    clo = np.einsum("cm,cm->c", W.lower, psi[W.stencil])
    cup = np.einsum("cm,cm->c", W.upper, psi[W.stencil])
    clo[0] = cup[0] = 0.0
    low = np.cumsum(clo)[1:N]
    up = np.cumsum(cup[::-1])[::-1][2:]
    return (2.0 * np.pi ** 3 / (k + 2)) * (low * W.r_low + up * W.r_up)


def apply_mode_potential(k, f, grid=None, check=True):
    """r -> int_0^inf K_k(t, r) f(t) dt at the grid nodes, O(n) per call.

    Parameters
    ----------
    k : int
        Harmonic degree.
    f : RadialFunction or array_like
        Source values; plain arrays need ``grid``.
    check : bool
        Reject inputs with |f(r_n)| r_n^6 > 1e3 max|f|.
    """
    ModeKernel(k)
    grid, v = _values(f, grid)
    if check:
        _check_integrability(grid, v)
    return RadialFunction(grid, _apply_prefix(grid, int(k), v))


def mode_potential_matrix(grid, k):
    """Dense n x n matrix M with (M f)_i = int K_k(t, r_i) f(t) dt.

    Built by expanding the cell weights into full rows; O(n^2) work and memory.
    """
    W = _weights(grid, int(k))
    N, n = grid.N, grid.n
    lo = np.zeros((N + 1, n))
    up = np.zeros((N + 1, n))
    rows = np.repeat(np.arange(N + 1), W.stencil.shape[1])
    np.add.at(lo, (rows, W.stencil.ravel()), W.lower.ravel())
    np.add.at(up, (rows, W.stencil.ravel()), W.upper.ravel())
    lo[0] = up[0] = 0.0
    low = np.cumsum(lo, axis=0)[1:N]
    upp = np.cumsum(up[::-1], axis=0)[::-1][2:]
    M = W.r_low[:, None] * low + W.r_up[:, None] * upp
    return (2.0 * np.pi ** 3 / (k + 2)) * M / W.envelope[None, :]


def apply_mode_potential_dense(k, f, grid=None, check=True):
    """Reference path: assemble the dense kernel matrix and multiply, O(n^2)."""
    ModeKernel(k)
    grid, v = _values(f, grid)
    if check:
        _check_integrability(grid, v)
    return RadialFunction(grid, mode_potential_matrix(grid, int(k)) @ v)


def oracle_potential_direct(f, x_norm, epsabs=0.0, epsrel=1e-10, limit=200):
    """Newtonian potential of a radial profile by nested adaptive quadrature.

    Evaluates |S^4| int_0^inf int_0^pi f(s) s^5 sin^4(theta)
    (x^2 - 2 x s cos(theta) + s^2)^{-2} dtheta ds without any use of the mode
    kernels.

    Parameters
    ----------
    f : callable
        Closed-form radial profile, decaying faster than s^{-6}.
    x_norm : float
        |x| >= 0.

    Raises
    ------
    ToleranceError
        If either quadrature level reports an error estimate above tolerance.
    """
    x = float(x_norm)
    if not np.isfinite(x) or x < 0:
        raise DomainError("x_norm must be finite and nonnegative")
    worst = {"inner_abserr": 0.0}

    def inner(s):
        if s == 0.0:
            return 0.0
        if x == 0.0:
            return f(s) * s * 3.0 * np.pi / 8.0
        d2 = (x - s) ** 2

        def g(th):
            sh = np.sin(th / 2)
            return np.sin(th) ** 4 / (d2 + 4.0 * x * s * sh * sh) ** 2

        pts = [min(1.0, 10.0 * abs(x - s) / max(x, s))] if abs(x - s) < max(x, s) else None
        val, err, info = integrate.quad(
            g, 0.0, np.pi, epsabs=0.0, epsrel=epsrel, limit=limit, points=pts, full_output=1
        )[:3]
        worst["inner_abserr"] = max(worst["inner_abserr"], err / max(abs(val), 1e-300))
        return f(s) * s ** 5 * val

    # split at the source scale as well as at s = |x|
    breaks = sorted({0.0, 1.0, 4.0, x, 4.0 * max(x, 1.0)})
    total, err_total = 0.0, 0.0
    pieces = list(zip(breaks[:-1], breaks[1:])) + [(breaks[-1], np.inf)]
    for a, b in pieces:
        out = integrate.quad(inner, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
        val, err = out[0], out[1]
        if len(out) > 3 and err > max(1e3 * epsabs, 1e-6 * abs(val)):
            raise ToleranceError(
                "outer quadrature did not converge",
                {"interval": (a, b), "value": val, "abserr": err, "message": out[3]},
            )
        total += val
        err_total += err
    if worst["inner_abserr"] > 1e-6:
        raise ToleranceError("inner angular quadrature did not converge", worst)
    return AREA_S4 * total


def expansion_coefficient(k, convention="resolved"):
    """Weight of the degree-k zonal term in the |x-y|^{-4} expansion.

    ``"resolved"`` gives 2/(k+2), the value consistent with the mode kernels
    and with the generating function of C_k^{(2)}.  ``"printed"`` gives
    k/(k+2), which removes the monopole and is kept for comparison.
    """
    if convention == "resolved":
        return 2.0 / (k + 2)
    if convention == "printed":
        return k / (k + 2)
    raise UsageError(f"unknown coefficient convention {convention!r}")


def expansion_tail_bound(rho, K):
    """Upper bound on the truncation error times |x v y|^4.

    Uses |C_k^{(2)}(t)| <= binomial(k+3, 3) and sums the tail until it is
    negligible.  Decays like rho^{K+1}/(1-rho)^4 up to a polynomial in K.
    """
    if not 0 <= rho < 1:
        raise DomainError("ratio must lie in [0, 1)")
    total, k = 0.0, K + 1
    term = math.comb(k + 3, 3) * rho ** k
    while term > 1e-18 * max(total, 1e-300) and k < K + 100000:
        total += term
        k += 1
        term = math.comb(k + 3, 3) * rho ** k
    return total


@dataclass(frozen=True)
class KernelExpansion:
    """Result of a truncated zonal expansion of |x - y|^{-4}."""

    value: float
    exact: float
    rho: float
    cosine: float
    terms: np.ndarray
    tail_bound: float
    convention: str

    @property
    def relative_error(self):
        return abs(self.value - self.exact) / self.exact


def _point(v, name):
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (6,) or not np.all(np.isfinite(v)):
        raise DomainError(f"{name} must be a finite point of R^6")
    nv = float(np.linalg.norm(v))
    if nv == 0:
        raise DomainError(f"{name} must be nonzero")
    return v, nv


def expand_kernel(x, y, K=40, convention="resolved", details=False):
    """Truncated series sum_{k<=K} coeff(k) |x^y|^k/|xvy|^{k+4} zonal(k, t).

    Returns the series value, or a :class:`KernelExpansion` with the per-term
    table when ``details`` is true.
    """
    x, nx = _point(x, "x")
    y, ny = _point(y, "y")
    if nx == ny:
        raise ExpansionDivergenceError("expansion diverges on |x| = |y|")
    if int(K) != K or K < 0:
        raise DomainError("truncation degree must be a nonnegative integer")
    K = int(K)
    small, big = min(nx, ny), max(nx, ny)
    rho = small / big
    t = float(np.clip(np.dot(x, y) / (nx * ny), -1.0, 1.0))
    ks = np.arange(K + 1)
    zonal = 0.5 * (ks + 2) * GegenbauerTable(K)(t)
    coeff = np.array([expansion_coefficient(k, convention) for k in ks])
    terms = coeff * rho ** ks * zonal / big ** 4
    value = float(np.sum(terms))
    if not details:
        return value
    exact = float(np.sum((x - y) ** 2) ** -2)
    return KernelExpansion(value, exact, rho, t, terms, expansion_tail_bound(rho, K) / big ** 4, convention)
