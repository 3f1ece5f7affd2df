"""Numerical verification toolkit for the linearized critical Hartree operator in R^6.

The ground state omega = 12 pi^{-3/2} (1 + r^2)^{-2} solves
-Delta omega = (|x|^{-4} * omega^2) omega.  Its linearization splits into
one-dimensional mode operators L_k on L^2((0, inf), r^5 dr), one per degree of
spherical harmonics on S^5.  This package discretizes those operators, checks
their kernels and spectra, and integrates the k = 0 shooting problem.
"""

from .errors import (
    ConfigurationError,
    DomainError,
    ExpansionDivergenceError,
    Hartree6Error,
    IntegrabilityError,
    NumericalError,
    PreconditionError,
    StiffnessError,
    ToleranceError,
    UsageError,
)
from .groundstate import (
    CONSTANTS,
    ModelConstants,
    RadialProfile,
    eval_lambda_omega,
    eval_omega,
    eval_omega_prime,
    eval_omega_second,
    eval_omega_squared,
)
from .grid import (
    RadialFunction,
    RadialGrid,
    build_grid,
    differentiate,
    weighted_inner_product,
    weighted_norm,
)
from .harmonics import GegenbauerTable, ModeIndex, alpha_k, gegenbauer_c2, zonal_density
from .potential import (
    ModeKernel,
    apply_mode_potential,
    expand_kernel,
    kernel_value,
    oracle_potential_direct,
)
from .operator import (
    ModeOperator,
    apply_mode_operator,
    assemble_frak_l0,
    assemble_mode_operator,
    monotonicity_gap,
    quadratic_form,
)
from .spectrum import SpectrumResult, classify_kernel, residual_norm, solve_spectrum
from .shooting import BoundReport, ShootingTrajectory, check_bounds, shoot_frak_L0

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CONSTANTS",
    "ModelConstants",
    "RadialProfile",
    "eval_omega",
    "eval_omega_prime",
    "eval_omega_second",
    "eval_omega_squared",
    "eval_lambda_omega",
    "RadialGrid",
    "RadialFunction",
    "build_grid",
    "differentiate",
    "weighted_inner_product",
    "weighted_norm",
    "GegenbauerTable",
    "ModeIndex",
    "alpha_k",
    "gegenbauer_c2",
    "zonal_density",
    "ModeKernel",
    "kernel_value",
    "apply_mode_potential",
    "oracle_potential_direct",
    "expand_kernel",
    "ModeOperator",
    "assemble_mode_operator",
    "assemble_frak_l0",
    "apply_mode_operator",
    "quadratic_form",
    "monotonicity_gap",
    "SpectrumResult",
    "solve_spectrum",
    "residual_norm",
    "classify_kernel",
    "ShootingTrajectory",
    "BoundReport",
    "shoot_frak_L0",
    "check_bounds",
    "Hartree6Error",
    "DomainError",
    "ConfigurationError",
    "UsageError",
    "IntegrabilityError",
    "ExpansionDivergenceError",
    "PreconditionError",
    "ToleranceError",
    "NumericalError",
    "StiffnessError",
]
