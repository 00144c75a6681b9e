"""Exception and warning types shared across the package."""


class QuadsenseError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QuadsenseError):
    """Bad configuration file, unknown key, or malformed override."""


class DivergenceError(QuadsenseError):
    """State norm exceeded the divergence bound during integration."""

    def __init__(self, message, t=None, index=None):
        super().__init__(message)
        self.t = t
        self.index = index


class StepFailure(QuadsenseError):
    """Adaptive controller could not meet tolerance above the minimum step."""


class WindowError(QuadsenseError):
    """Measurement window outside the sampled range or too short."""


class NotStabilized(QuadsenseError):
    """Peak amplitude still drifting between successive measurement windows."""


class DomainError(QuadsenseError):
    """Argument outside the physically meaningful domain."""


class NoInteriorMax(QuadsenseError):
    """Pre-scan of the optimizer bracket found no interior maximum."""


class WeakCouplingWarning(UserWarning):
    """Effective coupling J = g_m * E / delta is outside the weak regime."""
