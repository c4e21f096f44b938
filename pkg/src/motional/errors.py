"""Exception hierarchy.

Two families matter to callers: ``ConfigError`` (bad input, CLI exit code 2)
and ``NumericalError`` (an engine could not deliver the requested accuracy,
CLI exit code 3).
"""


class MotionalError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MotionalError, ValueError):
    """Invalid experiment configuration.

    ``errors`` holds ``(field_path, message)`` pairs so that every problem in
    a config is reported at once.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [("", errors)]
        self.errors = list(errors)
        lines = [f"{path}: {msg}" if path else msg for path, msg in self.errors]
        super().__init__("; ".join(lines))


class ParameterDomainError(MotionalError, ValueError):
    """A model parameter lies outside its allowed domain."""


class NumericalError(MotionalError):
    """Base for failures of a numerical method."""


class DegenerateTruncationError(NumericalError):
    """Truncation keeps too little probability mass for rejection sampling."""


class UnsupportedEvaluationError(NumericalError):
    """The requested quantity has no implemented evaluation path."""


class IntegrationError(NumericalError):
    """Quadrature did not reach its tolerance."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        if achieved is not None:
            message = f"{message} (achieved error estimate {achieved:.3g})"
        super().__init__(message)


class LaplaceDomainError(NumericalError, ValueError):
    """Laplace transform requested where its defining integral diverges."""


class PoleError(NumericalError):
    """Evaluation point sits on (or numerically at) a pole."""


class InversionError(NumericalError):
    """Numerical Laplace inversion failed."""


class GridTooNarrowError(NumericalError):
    """The grid does not bracket the half-maximum crossings."""


class RateTooHighError(NumericalError):
    """Expected number of resets per particle exceeds the supported limit."""


class IllConditionedRatioError(NumericalError):
    """Reference coherence is too small for a meaningful ratio."""


class FitWindowError(NumericalError):
    """Not enough usable data inside the fit window."""


class NoiseFloorError(FitWindowError):
    """Most of the fit window sits at or below the noise floor."""


class FitFailureError(NumericalError):
    """Nonlinear fit did not converge."""


class ScanRangeError(NumericalError):
    """Extremum lies on the boundary of the scanned range."""
