"""Zonal spherical-harmonic bookkeeping on S^5.

Only the quantities needed by the kernel expansion are provided: the dimension
alpha_k of the degree-k harmonics, the Gegenbauer polynomials C_k^{(2)} and the
zonal density sum_j Y_{k,j}(xi) Y_{k,j}(eta) = ((k+2)/2) C_k^{(2)}(xi . eta)
for harmonics normalized to mean square one over the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .errors import DomainError

__all__ = [
    "ModeIndex",
    "GegenbauerTable",
    "alpha_k",
    "gegenbauer_c2",
    "zonal_density",
    "zonal_density_exact",
    "generating_function",
    "sample_sphere",
    "degree_one_gram",
    "DEFAULT_MC_SEED",
    "DEFAULT_MC_SAMPLES",
]

DEFAULT_MC_SEED = 20240601
DEFAULT_MC_SAMPLES = 1_000_000


def _degree(k):
    if isinstance(k, bool) or int(k) != k:
        raise DomainError(f"degree must be an integer, got {k!r}")
    k = int(k)
    if k < 0:
        raise DomainError(f"degree must be nonnegative, got {k}")
    return k


def alpha_k(k):
    """Dimension of the space of degree-k spherical harmonics on S^5."""
    k = _degree(k)
    if k == 0:
        return 1
    if k == 1:
        return 6
    return comb(k + 5, k) - comb(k + 3, k - 2)


@dataclass(frozen=True)
class ModeIndex:
    """Label (k, j) of the basis harmonic Y_{k,j}, with 1 <= j <= alpha_k."""

    k: int
    j: int

    def __post_init__(self):
        _degree(self.k)
        if not 1 <= self.j <= alpha_k(self.k):
            raise DomainError(f"j={self.j} outside 1..{alpha_k(self.k)} for k={self.k}")


def _cosine(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(np.abs(t) > 1.0):
        raise DomainError("cosine argument must lie in [-1, 1]")
    return t


def _recurrence(kmax, t):
    """Rows C_0..C_kmax of C_k^{(2)}(t) by the three-term recurrence."""
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 4.0 * t
    for k in range(2, kmax + 1):
        out[k] = (2.0 * (k + 1) * t * out[k - 1] - (k + 2) * out[k - 2]) / k
    return out


def gegenbauer_c2(k, t):
    """Gegenbauer polynomial C_k^{(2)}(t) on [-1, 1]."""
    k = _degree(k)
    t = _cosine(t)
    val = _recurrence(k, t)[k]
    return float(val) if val.ndim == 0 else val


def zonal_density(k, t):
    """Zonal form ((k+2)/2) C_k^{(2)}(t) of sum_j Y_{k,j}(xi) Y_{k,j}(eta)."""
    k = _degree(k)
    val = 0.5 * (k + 2) * np.asarray(gegenbauer_c2(k, t))
    return float(val) if val.ndim == 0 else val


def zonal_density_exact(k, t=1):
    """Rational evaluation of the zonal density at a rational cosine.

    Runs the recurrence in :class:`fractions.Fraction` arithmetic, so the
    dimension identity zonal_density(k, 1) = alpha_k can be checked exactly.
    """
    k = _degree(k)
    t = Fraction(t)
    if abs(t) > 1:
        raise DomainError("cosine argument must lie in [-1, 1]")
    c_prev, c = Fraction(1), 4 * t
    if k == 0:
        c = c_prev
    for m in range(2, k + 1):
        c_prev, c = c, (2 * (m + 1) * t * c - (m + 2) * c_prev) / m
    return Fraction(k + 2, 2) * c


def generating_function(r, t):
    """Closed form (1 - 2 r t + r^2)^{-2} = sum_k C_k^{(2)}(t) r^k, |r| < 1."""
    return (1.0 - 2.0 * r * t + r * r) ** -2


@dataclass(frozen=True)
class GegenbauerTable:
    """All C_k^{(2)} for k <= max_degree, evaluated on demand.

    Parameters
    ----------
    max_degree : int
        Largest degree K kept in the table.
    """

    max_degree: int
    _binom_at_one: tuple = field(init=False, repr=False)

    def __post_init__(self):
        _degree(self.max_degree)
        object.__setattr__(
            self, "_binom_at_one", tuple(comb(k + 3, 3) for k in range(self.max_degree + 1))
        )

    def __call__(self, t):
        """Array of shape (K+1,) + shape(t) with C_0..C_K evaluated at t."""
        return _recurrence(self.max_degree, _cosine(t))

    def value_at_one(self, k):
        """C_k^{(2)}(1) = binomial(k+3, 3)."""
        return self._binom_at_one[k]

    def partial_sums(self, r, t):
        """Partial sums sum_{k<=K} C_k(t) r^k for K = 0..max_degree."""
        rows = self(t)
        powers = float(r) ** np.arange(self.max_degree + 1)
        powers = powers.reshape((-1,) + (1,) * (rows.ndim - 1))
        return np.cumsum(rows * powers, axis=0)


def sample_sphere(n, seed=DEFAULT_MC_SEED, dim=6):
    """Uniform points on the unit sphere of R^dim via normalized Gaussians."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((int(n), dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def degree_one_gram(n=DEFAULT_MC_SAMPLES, seed=DEFAULT_MC_SEED):
    """Monte Carlo Gram matrix of Y_{1,j}(xi) = sqrt(6) xi_j on S^5.

    Returns
    -------
    gram : ndarray, shape (6, 6)
        Estimates of int_{S^5} Y_{1,i} Y_{1,j} dsigma; the exact value is
        pi^3 times the identity.
    stderr : ndarray, shape (6, 6)
        Standard errors of the estimates.
    """
    xi = sample_sphere(n, seed)
    y = np.sqrt(6.0) * xi
    m = len(y)
    mean = y.T @ y / m
    # second moment of y_i y_j without forming the (m, 6, 6) product
    second = (y * y).T @ (y * y) / m
    var = (second - mean ** 2) * m / (m - 1)
    return np.pi ** 3 * mean, np.pi ** 3 * np.sqrt(var / m)
