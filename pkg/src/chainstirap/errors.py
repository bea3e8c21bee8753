"""Exception hierarchy shared by every module.

The CLI maps :class:`ConfigError` (and other input problems) to exit code 2
and :class:`NumericalError` to exit code 3.
"""


class ChainStirapError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(ChainStirapError, ValueError):
    """A chain or protocol description violates its invariants."""


class DomainError(ChainStirapError, ValueError):
    """An argument lies outside the domain of an operation."""


class NoBoundStateError(ChainStirapError, ValueError):
    """The defect energy is zero, so there is no localized state."""


class DegenerateSpectrumError(ChainStirapError, ValueError):
    """Both effective couplings vanish and the adiabatic triple is undefined."""


class WrongMetricError(ChainStirapError, TypeError):
    """A metric was applied to the wrong kind of trajectory."""


class ConfigError(ChainStirapError, ValueError):
    """Experiment configuration could not be parsed or validated."""


class NumericalError(ChainStirapError, RuntimeError):
    """Base class for numerical failures."""


class SolverFailure(NumericalError):
    """Root finding did not produce the expected number of roots."""


class AmbiguousEigenstateError(NumericalError):
    """The requested eigenvector belongs to a (near-)degenerate level."""


class IntegrationError(NumericalError):
    """Time integration failed a convergence or positivity check."""


class NotFoundError(NumericalError):
    """A search did not find a point satisfying its target."""

    def __init__(self, message: str, best_value: float | None = None):
        super().__init__(message)
        self.best_value = best_value
