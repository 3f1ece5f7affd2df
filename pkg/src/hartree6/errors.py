"""Exception hierarchy shared by all modules."""


class Hartree6Error(Exception):
    """Base class for library errors."""


class DomainError(Hartree6Error, ValueError):
    """An argument lies outside the domain of a closed-form evaluator."""


class ConfigurationError(Hartree6Error, ValueError):
    """Invalid discretization or run configuration."""


class UsageError(Hartree6Error, ValueError):
    """Incompatible objects or unsupported options were combined."""


class IntegrabilityError(Hartree6Error, ValueError):
    """Input decays too slowly for the potential integral to converge."""


class ExpansionDivergenceError(Hartree6Error, ValueError):
    """The zonal series is evaluated on the sphere |x| = |y|."""


class PreconditionError(Hartree6Error, ValueError):
    """A documented precondition on the input data is violated."""


class ToleranceError(Hartree6Error, RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NumericalError(Hartree6Error, RuntimeError):
    """A dense linear-algebra routine failed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class StiffnessError(Hartree6Error, RuntimeError):
    """The ODE integrator could not advance (step size underflow)."""
