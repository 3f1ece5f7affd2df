"""Closed-form ground state of the critical Hartree equation in six dimensions.

The ground state is

    omega(r) = 12 pi^{-3/2} (1 + r^2)^{-2},

and it solves -Delta omega = 2 pi^{3/2} omega^2, because its Newtonian
potential (convolution with |x|^{-4}) is 2 pi^{3/2} omega.  Everything here is
evaluated from closed forms so that downstream tests only see the error of the
discrete operators.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelConstants",
    "CONSTANTS",
    "RadialProfile",
    "eval_omega",
    "eval_omega_prime",
    "eval_omega_second",
    "eval_omega_squared",
    "eval_lambda_omega",
    "radial_laplacian_omega",
    "radial_laplacian_omega_exact",
    "profile",
]

C_OMEGA = 12.0 * np.pi ** -1.5
C_HARTREE = 2.0 * np.pi ** 1.5
VOL_S5 = np.pi ** 3
AREA_S4 = 8.0 * np.pi ** 2 / 3.0


@dataclass(frozen=True)
class ModelConstants:
    """Numerical constants of the model.

    Attributes
    ----------
    c_omega : float
        Amplitude of the ground state, 12 pi^{-3/2}.
    c_hartree : float
        Coupling in the Newton identity Phi(omega^2) = c_hartree * omega.
    vol_s5 : float
        Surface measure of the unit sphere S^5, equal to pi^3.
    area_s4 : float
        Surface measure of S^4, used by the angular reduction of the potential.
    """

    c_omega: float = C_OMEGA
    c_hartree: float = C_HARTREE
    vol_s5: float = VOL_S5
    area_s4: float = AREA_S4

    def __post_init__(self):
        if not self.vol_s5 > 0:
            raise DomainError("vol_s5 must be positive")

    @property
    def newton_product(self) -> float:
        """c_omega * c_hartree; equals 24 up to rounding."""
        return self.c_omega * self.c_hartree


CONSTANTS = ModelConstants()


def _radius(r):
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise DomainError("radius must be finite")
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    return r


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_omega(r):
    """Ground state omega(r) = 12 pi^{-3/2} (1+r^2)^{-2}.

    Accepts scalars or arrays of nonnegative, finite radii.
    """
    r = _radius(r)
    return _out(C_OMEGA / (1.0 + r * r) ** 2)


def eval_omega_prime(r):
    """First derivative omega'(r) = -48 pi^{-3/2} r (1+r^2)^{-3}."""
    r = _radius(r)
    return _out(-4.0 * C_OMEGA * r / (1.0 + r * r) ** 3)


def eval_omega_second(r):
    """Second derivative omega''(r) = -48 pi^{-3/2} (1 - 5 r^2) (1+r^2)^{-4}."""
    r = _radius(r)
    return _out(-4.0 * C_OMEGA * (1.0 - 5.0 * r * r) / (1.0 + r * r) ** 4)


def eval_omega_squared(r):
    """omega(r)^2, the source of the Newton identity."""
    r = _radius(r)
    return _out((C_OMEGA / (1.0 + r * r) ** 2) ** 2)


def radial_laplacian_omega(r):
    """-(omega'' + 5 omega'/r) in closed form, valid at r = 0 as well.

    Assembled term by term from the two derivatives rather than simplified, so
    that comparing it with 2 pi^{3/2} omega^2 is a genuine check.
    """
    r = _radius(r)
    # omega'' + 5 omega'/r = -4 c (1 - 5r^2)/(1+r^2)^4 - 20 c/(1+r^2)^3
    s = 1.0 + r * r
    return _out(4.0 * C_OMEGA * (1.0 - 5.0 * r * r) / s ** 4 + 20.0 * C_OMEGA / s ** 3)


def radial_laplacian_omega_exact(r):
    """Same two terms as :func:`radial_laplacian_omega`, summed in rational arithmetic.

    Each float radius is an exact binary rational, so omega''/c and
    5 omega'/(c r) are formed exactly and only the final product with c is
    rounded.  This removes the O(eps r^2) cancellation of the float sum at
    large r.
    """
    r = _radius(r)
    out = []
    for x in np.atleast_1d(r).ravel():
        q = Fraction(float(x))
        s = 1 + q * q
        out.append(float(4 * (1 - 5 * q * q) / s ** 4 + 20 / s ** 3) * C_OMEGA)
    out = np.array(out).reshape(np.shape(r))
    return _out(out)


def eval_lambda_omega(r, convention="generator"):
    """Infinitesimal scaling mode of omega.

    Parameters
    ----------
    r : float or array_like
        Nonnegative radii.
    convention : {"generator", "doubled"}
        ``"generator"`` (default) returns d/dlam [lam^2 omega(lam r)] at lam = 1,
        i.e. 2 omega + r omega' = 24 pi^{-3/2} (1 - r^2)(1+r^2)^{-3}.  This is
        the function annihilated by the linearized operator.  ``"doubled"``
        returns 2 omega + 2 r omega' = 24 pi^{-3/2} (1 - 3r^2)(1+r^2)^{-3},
        which is not a scaling mode and is kept only for comparison.
    """
    r = _radius(r)
    s = 1.0 + r * r
    if convention == "generator":
        return _out(2.0 * C_OMEGA * (1.0 - r * r) / s ** 3)
    if convention == "doubled":
        return _out(2.0 * C_OMEGA * (1.0 - 3.0 * r * r) / s ** 3)
    raise DomainError(f"unknown convention {convention!r}")


class RadialProfile(enum.Enum):
    """Named closed-form radial profiles."""

    OMEGA = "omega"
    OMEGA_PRIME = "omega_prime"
    OMEGA_SECOND = "omega_second"
    LAMBDA_OMEGA = "lambda_omega"
    OMEGA_SQUARED = "omega_squared"

    def __call__(self, r):
        return profile(self)(r)


_EVALUATORS = {
    RadialProfile.OMEGA: eval_omega,
    RadialProfile.OMEGA_PRIME: eval_omega_prime,
    RadialProfile.OMEGA_SECOND: eval_omega_second,
    RadialProfile.LAMBDA_OMEGA: eval_lambda_omega,
    RadialProfile.OMEGA_SQUARED: eval_omega_squared,
}


def profile(kind):
    """Return the closed-form evaluator for a :class:`RadialProfile` or its name."""
    return _EVALUATORS[RadialProfile(kind)]
