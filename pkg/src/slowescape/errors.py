"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class EscapeError(Exception):
    """Base class for every library error."""


class DomainError(EscapeError, ValueError):
    """Input outside the mathematical domain of an operation."""


class CapacityError(EscapeError, OverflowError):
    """Magnitude exceeds what the working representation can hold.

    ``log_magnitude`` carries an estimate of ``log|value|`` when one is
    available so callers can switch to log-scale machinery.
    """

    def __init__(self, message: str, log_magnitude: float | None = None):
        super().__init__(message)
        self.log_magnitude = log_magnitude


class UnsupportedDepthError(EscapeError):
    """No log-scale maximum-modulus rule exists at the requested depth."""


class ScaleMismatchError(EscapeError, ValueError):
    """A symbolic (level-index) scale was combined with a concrete point."""


class HorizonError(EscapeError):
    """The schedule horizon ends before the first pause index is reached."""


class InfeasibleError(EscapeError):
    """The target rate never dominates the required region magnitudes."""


class SynthesisError(EscapeError):
    """Backward pull-back found no preimage inside the prescribed region."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class InconsistencyError(EscapeError):
    """Forward re-verification contradicts a synthesized orbit."""


class PlannerError(EscapeError):
    """The fast-orbit planner could not certify a covering step."""

    def __init__(self, message: str, radius: float | None = None):
        super().__init__(message)
        self.radius = radius


class PipelineError(EscapeError):
    """A slow-orbit pipeline stage failed (e.g. no pause region found)."""
