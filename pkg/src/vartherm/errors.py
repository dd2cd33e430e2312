"""Exception hierarchy.

Two error families matter to the integration loop: InadmissibleStateError
(and subclasses) marks a state that a trial step may not visit, and is
retryable by adaptive step rejection; IntegrationFailure marks an aborted
run. Everything else is an ordinary usage or model error.
"""


class VarthermError(Exception):
    """Base class for all vartherm errors."""


class DimensionMismatchError(VarthermError):
    """State or model dimensions disagree with the declared topology."""


class DomainError(VarthermError):
    """Input outside the physical domain of a state function (V <= 0, N <= 0, ...)."""


class InadmissibleStateError(VarthermError):
    """State violates admissibility (non-positive temperature, negative moles,
    geometry bounds). Adaptive integrators reject the step and retry."""


class NegativeMolesError(InadmissibleStateError):
    """A mole number fell below the negative-moles floor."""


class GeometryError(InadmissibleStateError):
    """A mechanical coordinate left its admissible range (e.g. piston out of cylinder)."""


class SingularMassMatrixError(VarthermError):
    """The mechanical mass matrix is not symmetric positive definite."""


class ModelValidationError(VarthermError):
    """A model object violates its admissibility contract (PSD coefficients,
    Lavoisier law, positive initial temperatures, ...)."""

    def __init__(self, message, field_path=None):
        super().__init__(message)
        self.field_path = field_path


class FormulationError(VarthermError):
    """An internal structural identity failed (first-law assembly, sign of the
    entropy production for compliant phenomenology). Indicates a bug or an
    inconsistent user-supplied model."""


class UnsupportedDecompositionError(VarthermError):
    """The scenario Lagrangian does not decompose into subsystem pieces."""


class IntegrationFailure(VarthermError):
    """Time integration aborted."""


class StiffnessFailure(IntegrationFailure):
    """Adaptive step size underflowed; the problem is too stiff for the method."""


class NewtonFailure(IntegrationFailure):
    """Newton iteration of an implicit step did not converge."""


class MaxStepsExceeded(IntegrationFailure):
    """Step budget exhausted before reaching the end time."""


class ConfigError(VarthermError):
    """Configuration file failed to parse or validate."""

    def __init__(self, message, field_path=None, suggestion=None):
        super().__init__(message)
        self.field_path = field_path
        self.suggestion = suggestion
