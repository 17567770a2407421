"""Exception types shared across the package."""


class WildDistortError(Exception):
    """Base class for all errors raised by this package."""


class SizingError(WildDistortError):
    """Image too small (or crop window too large) for the requested transform."""


class ParameterError(WildDistortError):
    """Unknown kind/level, malformed severity table, or invalid configuration."""


class UndefinedMetricError(WildDistortError):
    """Metric has no defined value (e.g. ROC AUC on a single-class sample)."""


class ManifestError(WildDistortError):
    """Malformed manifest, listing, or prediction file; misaligned ids."""
