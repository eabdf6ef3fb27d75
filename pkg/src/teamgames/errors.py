"""Exception types shared across the package."""


class TeamworkGameError(Exception):
    """Base class for every error this package raises on purpose."""


class InputError(TeamworkGameError, ValueError):
    """An argument violates the documented domain of an operation."""


class ConfigurationError(TeamworkGameError, ValueError):
    """A game, agent, or sweep configuration violates an invariant."""


class UnsupportedEvaluationError(TeamworkGameError):
    """The evaluation function lacks the smoothness this operation needs."""


class WrongSolverError(TeamworkGameError):
    """The game's substitution parameter does not match this solver."""


class RegimeError(TeamworkGameError):
    """The requested point lies outside the regime where the construction is valid."""


class NoEquilibriumError(TeamworkGameError):
    """The fixed-point scan found no equilibrium.

    ``scan`` holds the (G, R(G) - G) trace so callers can see what was searched.
    """

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan


class UndefinedDispersionError(TeamworkGameError, ValueError):
    """Percentage dispersion is undefined when the sample mean is not positive."""


class DegenerateRegressionError(TeamworkGameError, ValueError):
    """Ordinary least squares needs at least two distinct abscissae."""
