"""Exception hierarchy shared by all elastoball modules."""


class ElastoballError(Exception):
    """Base class for all package errors."""


class DomainError(ElastoballError, ValueError):
    """Argument outside the domain of a constitutive function."""


class InvalidParameterError(ElastoballError, ValueError):
    """Material or model parameters violate a precondition."""


class NotHyperelasticError(ElastoballError, TypeError):
    """Operation needs a stored energy function the model does not have."""


class ClassificationError(ElastoballError):
    """No exponents (a, b, c) make Gamma and Upsilon continuous and nonzero at the origin."""


class UnsupportedModelError(ElastoballError):
    """The requested construction is not available for this model (e.g. c != 0)."""


class WindowError(ElastoballError, ValueError):
    """Central density outside the admissible window (1, Delta)."""


class AssumptionError(ElastoballError):
    """Model fails its admissibility certificate."""


class NoCrossingError(ElastoballError):
    """The radial pressure never vanished before the asymptotic regime."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class HyperbolicityLossError(ElastoballError):
    """d p_rad / d delta became non-positive inside the ball."""


class StepSizeError(ElastoballError):
    """Adaptive integrator step size underflowed."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class ModelMismatchError(ElastoballError, ValueError):
    """Exact solution paired with a model of a different name."""
