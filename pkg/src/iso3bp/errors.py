"""Exception hierarchy shared by the numerical modules."""


class NumericalError(Exception):
    """Base class for every numerical failure raised by iso3bp."""

    reason = "numerical-failure"


class IntegrationError(NumericalError):
    """An integration stopped before reaching its end time.

    ``t`` is the time reached when the failure was detected.
    """

    reason = "integration-failure"

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class CollisionError(IntegrationError):
    reason = "collision"


class StepSizeUnderflow(IntegrationError):
    reason = "step-underflow"


class NoConvergence(NumericalError):
    reason = "no-convergence"


class CorrectionTooFar(NoConvergence):
    """Newton converged, but farther from the predictor than ``eps3``."""

    reason = "correction-too-far"


class SingularJacobian(NumericalError):
    reason = "singular-jacobian"


class ZeroTangent(NumericalError):
    reason = "zero-tangent"


class NoInteriorMinimum(NumericalError):
    reason = "no-interior-minimum"


class TargetOutOfRange(NumericalError):
    reason = "target-out-of-range"
