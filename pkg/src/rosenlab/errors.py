"""Exception types shared across the package.

Each class marks one failure category so tests and callers can tell a bad
argument from a numerical breakdown. Everything derives from RosenlabError.
"""


class RosenlabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RosenlabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ParameterError(RosenlabError, ValueError):
    """Structurally invalid parameter (wrong sign, wrong range, wrong shape)."""


class RegimeError(RosenlabError, ValueError):
    """Parameters valid for the model but outside the long-memory regime."""


class UnsupportedModelError(RosenlabError, NotImplementedError):
    """Requested a model/dimension combination with no implemented formula."""


class AccuracyError(RosenlabError, RuntimeError):
    """A series or quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class IntegrabilityError(RosenlabError, ValueError):
    """Integrand diverges too fast at an endpoint for the integral to exist."""


class EmbeddingError(RosenlabError, RuntimeError):
    """Circulant embedding is indefinite beyond tolerance; enlarge the torus."""


class CoverageError(RosenlabError, ValueError):
    """Simulation lattice does not cover the requested observation window."""


class RankError(RosenlabError, ValueError):
    """Functional does not have the Hermite rank an operation requires."""


class DegenerateFitError(RosenlabError, RuntimeError):
    """Not enough usable points above the noise floor to fit a slope."""
