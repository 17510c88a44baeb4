"""Exception hierarchy shared by all laplab modules."""


class LaplabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LaplabError, ValueError):
    """An argument lies outside the domain of a function."""


class NonFinite(LaplabError, ArithmeticError):
    """A stencil or objective evaluation produced inf or nan."""


class SolverError(LaplabError):
    """Base class for mode-finding failures."""


class NonConvergence(SolverError):
    pass


class IndefiniteHessian(SolverError):
    pass


class DomainEscape(SolverError):
    pass


class NonPositiveDefinite(SolverError):
    pass


class DegenerateData(LaplabError, ValueError):
    """The posterior mode sits on the boundary of the parameter space."""


class ToleranceNotMet(LaplabError):
    pass


class DimensionTooLarge(LaplabError, ValueError):
    pass


class InsufficientData(LaplabError, ValueError):
    pass


class ConfigError(LaplabError, ValueError):
    pass
