"""Exception types shared across the package."""


class HawkesVolError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(HawkesVolError, ValueError):
    """Model or sampler parameters violate their admissibility constraints."""


class NonstationaryError(HawkesVolError, ValueError):
    """Requested quantity is undefined because the spectral condition fails."""


class ExplosionError(HawkesVolError, RuntimeError):
    """Simulated intensity crossed the blow-up guard."""

    def __init__(self, time: float, intensity: float):
        self.time = time
        self.intensity = intensity
        super().__init__(
            f"total intensity {intensity:.3g} exceeded the blow-up guard at t={time:.6g}s"
        )


class DegenerateStreamError(HawkesVolError, ValueError):
    """Event stream is too thin for the requested operation."""


class DegenerateModelError(HawkesVolError, ValueError):
    """A moment matrix is numerically singular; the variance formula is unusable."""


class InvalidLikelihoodError(HawkesVolError, ValueError):
    """An inferred intensity is nonpositive at an event time."""


class InsufficientDataError(HawkesVolError, ValueError):
    """Input series is too short for the requested estimator."""


class DataIntegrityError(HawkesVolError, ValueError):
    """Raw quote data is inconsistent with the half-tick price grid."""
