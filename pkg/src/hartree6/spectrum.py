"""Eigenpairs of the discretized mode operators and kernel diagnostics.

The collocation matrix is not symmetric in the r^5 dr inner product, so the
eigenproblem is solved by a dense general eigensolver on ``a_total``.  The
resulting eigenvalues are real to rounding for the smooth modes of interest.
A discretized continuum of box modes accumulates at 0 (the edge of the
essential spectrum).  These modes spread their mass to large radii, and
:func:`classify_kernel` filters them out by that localization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import DomainError, NumericalError, UsageError
from .grid import RadialFunction, weighted_norm
from .operator import apply_mode_operator

__all__ = [
    "SpectrumResult",
    "KernelCandidate",
    "solve_spectrum",
    "residual_norm",
    "classify_kernel",
    "sign_changes",
    "localization",
    "DEFAULT_TAIL_RADIUS_FACTOR",
]

DEFAULT_TAIL_RADIUS_FACTOR = 20.0


def sign_changes(values, rel_floor=1e-8):
    """Number of sign changes, ignoring entries below rel_floor * max|values|."""
    v = np.asarray(values, dtype=float)
    keep = np.abs(v) > rel_floor * np.max(np.abs(v))
    s = np.sign(v[keep])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def localization(f, r_tail):
    """Fraction of the r^5 dr mass of f^2 beyond r_tail."""
    g = f.grid
    mass = g.weights_r5 * f.values ** 2
    total = mass.sum()
    return float(mass[g.nodes > r_tail].sum() / total) if total > 0 else 0.0


@dataclass(frozen=True)
class SpectrumResult:
    """Smallest eigenpairs of one mode operator.

    Attributes
    ----------
    k : int
    eigenvalues : ndarray
        Ascending real parts.
    eigenvectors : list of RadialFunction
        Normalized to unit r^5 dr norm; largest-magnitude entry positive.
    residuals : ndarray
        ||L_k v - lambda v|| / ||v|| per pair, using the prefix-sum path.
    localization : ndarray
        Fraction of r^5 dr mass beyond ``r_tail``.
    r_tail : float
    max_imag : float
        Largest |imaginary part| among the reported eigenvalues.
    """

    k: int
    eigenvalues: np.ndarray
    eigenvectors: list = field(repr=False)
    residuals: np.ndarray
    localization: np.ndarray
    r_tail: float
    max_imag: float

    def __len__(self):
        return len(self.eigenvalues)


def solve_spectrum(op, num_eigs=6, r_tail=None):
    """The ``num_eigs`` algebraically smallest eigenpairs of ``op``.

    Deterministic for a given grid and degree: eigenvectors are normalized in
    the weighted norm with a fixed sign convention.
    """
    grid = op.grid
    if int(num_eigs) != num_eigs or not 1 <= num_eigs <= grid.n - 2:
        raise UsageError(f"num_eigs must lie in 1..{grid.n - 2}")
    num_eigs = int(num_eigs)
    if r_tail is None:
        r_tail = DEFAULT_TAIL_RADIUS_FACTOR * grid.map_scale
    try:
        w, V = la.eig(op.a_total)
    except la.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError("dense eigensolver failed", {"n": grid.n, "error": str(exc)}) from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigensolver returned non-finite values", {"n": grid.n})
    order = np.lexsort((np.abs(w.imag), w.real))[:num_eigs]
    lam = w.real[order]
    vecs, res, loc = [], [], []
    for j, lj in zip(order, lam):
        v = V[:, j].real.copy()
        if not np.any(v):
            v = V[:, j].imag.copy()
        v /= np.sqrt(np.dot(grid.weights_r5, v * v))
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        f = RadialFunction(grid, v)
        vecs.append(f)
        res.append(residual_norm(op, f, lj))
        loc.append(localization(f, r_tail))
    return SpectrumResult(
        op.k, lam, vecs, np.array(res), np.array(loc), float(r_tail),
        float(np.max(np.abs(w.imag[order]))),
    )


def residual_norm(op, f, lam):
    """||L_k f - lam f|| / ||f|| in the weighted norm."""
    if f.grid is not op.grid:
        raise UsageError("function and operator live on different grids")
    nf = weighted_norm(f)
    if nf == 0:
        raise DomainError("residual of the zero function is undefined")
    r = apply_mode_operator(op, f) - lam * f
    return weighted_norm(r) / nf


@dataclass(frozen=True)
class KernelCandidate:
    """A localized eigenpair with |lambda| <= tol_eig."""

    index: int
    eigenvalue: float
    localization: float
    sign_changes: int
    residual: float


def classify_kernel(result, tol_eig=1e-6, tail_fraction=0.05):
    """Eigenpairs that look like genuine L^2 zero modes.

    Keeps pairs with |lambda| <= tol_eig whose mass beyond ``result.r_tail``
    is at most ``tail_fraction``, and reports the sign-change count of each.
    """
    if not tol_eig > 0:
        raise UsageError("tol_eig must be positive")
    if not 0 < tail_fraction < 1:
        raise UsageError("tail_fraction must lie in (0, 1)")
    out = []
    for i, (lam, loc, v, res) in enumerate(
        zip(result.eigenvalues, result.localization, result.eigenvectors, result.residuals)
    ):
        if abs(lam) <= tol_eig and loc <= tail_fraction:
            out.append(KernelCandidate(i, float(lam), float(loc), sign_changes(v.values), float(res)))
    return out
