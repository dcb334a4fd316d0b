"""Exception and warning types shared across the package."""


class PhotonOpsError(Exception):
    """Base class for all library errors."""


class ValidationError(PhotonOpsError):
    """A state or operator failed a hard structural invariant."""


class TruncationOverflowError(PhotonOpsError):
    """An operation would move probability mass outside the truncated space."""


class VanishingProbabilityError(PhotonOpsError):
    """Conditional output requested for an outcome of (numerically) zero probability."""


class TailToleranceError(PhotonOpsError):
    """A state family cannot be represented within the space's tail tolerance.

    Carries ``required_dim``, an estimate of the cutoff that would suffice.
    """

    def __init__(self, message: str, required_dim: int | None = None):
        super().__init__(message)
        self.required_dim = required_dim


class RegimeViolationError(PhotonOpsError):
    """Bound evaluated outside the linearization regime it was derived in."""


class EmptyConstraintError(PhotonOpsError):
    """The requested constraint set contains no states."""


class WitnessNotFoundError(PhotonOpsError):
    """A witness search exhausted its grid without reaching the target.

    ``best`` holds the maximum achieved value, ``trend`` the full scan data.
    """

    def __init__(self, message: str, best: float | None = None, trend=None):
        super().__init__(message)
        self.best = best
        self.trend = trend or []


class DimensionExhaustedError(WitnessNotFoundError):
    """A scan hit the truncation cutoff before reaching its target."""


class TailMassWarning(UserWarning):
    """State places more mass near the cutoff than the declared tail tolerance."""


class TraceIncreasingWarning(UserWarning):
    """Constructed map is not trace nonincreasing on the truncated space."""
