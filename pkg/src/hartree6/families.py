"""Seeded random test profiles for property checks.

All profiles are finite sums of rational bumps

    f(r) = r^k sum_j a_j (1 + (r/s_j)^2)^{-m_j},

with m_j large enough that f decays at least like r^{-4}.  That is the decay
of omega, and it keeps every weighted integral used by the checks absolutely
convergent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import RadialFunction, weighted_inner_product
from .groundstate import eval_omega_squared

__all__ = [
    "RationalProfile",
    "random_positive_profile",
    "random_mode_profile",
    "random_orthogonal_radial",
    "project_out",
]


@dataclass(frozen=True)
class RationalProfile:
    """r^degree sum_j amps[j] (1 + (r/scales[j])^2)^{-powers[j]}."""

    amps: tuple
    scales: tuple
    powers: tuple
    degree: int = 0

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for a, s, m in zip(self.amps, self.scales, self.powers):
            out = out + a * (1.0 + (r / s) ** 2) ** (-m)
        out = out * r ** self.degree
        return float(out) if out.ndim == 0 else out

    @property
    def decay(self):
        """Algebraic decay rate at infinity (a lower bound if terms cancel)."""
        return 2 * min(self.powers) - self.degree


def _draw(rng, degree, signed, terms):
    nterm = int(rng.integers(1, terms + 1))
    base = int(np.ceil(degree / 2)) + 2
    amps = rng.uniform(-1.0, 1.0, nterm) if signed else rng.uniform(0.2, 1.5, nterm)
    scales = rng.uniform(0.5, 2.0, nterm)
    powers = base + rng.integers(0, 3, nterm)
    return RationalProfile(tuple(amps), tuple(scales), tuple(int(p) for p in powers), int(degree))


def random_positive_profile(rng, terms=3):
    """Strictly positive radial profile with positive amplitudes."""
    return _draw(rng, 0, False, terms)


def random_mode_profile(rng, k, terms=3):
    """Signed profile vanishing like r^k at the origin, for mode k >= 1."""
    return _draw(rng, k, True, terms)


def project_out(f, g):
    """f - (<f, g>/<g, g>) g in the r^5 dr inner product."""
    return f - (weighted_inner_product(f, g) / weighted_inner_product(g, g)) * g


def random_orthogonal_radial(rng, grid, terms=3):
    """Signed radial profile on ``grid`` projected to <f, omega^2> = 0."""
    prof = _draw(rng, 0, True, terms)
    f = grid.sample(prof)
    w2 = RadialFunction(grid, eval_omega_squared(grid.nodes))
    return project_out(f, w2)
