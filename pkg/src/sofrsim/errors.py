"""Exception hierarchy shared across the package."""


class SofrSimError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeError(SofrSimError):
    """A day offset or period falls outside the curve's domain."""


class NoBusinessDayError(SofrSimError):
    """No business day found within the lookback window."""


class MissingFixingError(SofrSimError):
    """A required overnight rate fixing is absent from the rate path."""


class EmptyQuoteSetError(SofrSimError):
    """Calibration was attempted with no quotes."""


class QuoteOutOfRangeError(SofrSimError):
    """A quote's reference period is not covered by the basis."""


class NumericalFailureError(SofrSimError):
    """A matrix decomposition or iterative solve did not converge."""


class FactorDomainError(SofrSimError):
    """A log-transform argument was non-positive."""

    def __init__(self, message, index=None, date=None):
        super().__init__(message)
        self.index = index
        self.date = date


class InsufficientDataError(SofrSimError):
    """Too few observations for the requested operation."""


class SingularDesignError(SofrSimError):
    """Regression design matrix is singular."""


class TooShortError(SofrSimError):
    """Time series too short to estimate the model."""


class TargetOutOfRangeError(SofrSimError):
    """A median target refers to a horizon outside the drift schedule."""


class UnstableModelError(SofrSimError):
    """Simulation refused: spectral radius of the one-step matrix is >= 1."""


class TooFewScenariosError(SofrSimError):
    """Not enough scenarios for a meaningful quantile estimate."""


class HorizonTooShortError(SofrSimError):
    """Scenario horizon does not cover the instrument's dates."""


class PriceOverflowError(SofrSimError):
    """Indifference-price expectation overflowed despite log-sum-exp guard."""


class DegenerateSamplesError(SofrSimError):
    """All support samples are identical; hull membership is ill-posed."""


class DimensionTooLargeError(SofrSimError):
    """Requested hull check exceeds the supported dimension cap."""


class ConfigError(SofrSimError):
    """Malformed configuration or input file."""
