"""Exception types raised across the package."""


class TrimagingError(Exception):
    """Base class for all package-specific errors."""


class SingularGreen(TrimagingError):
    """Green function requested at (or too close to) zero separation."""


class SingularFoldyLax(TrimagingError):
    """Foldy-Lax interaction matrix is numerically singular (resonance)."""


class ZeroTau(TrimagingError):
    """Foldy-Lax model requires every scattering coefficient to be nonzero."""


class DegenerateDenominator(TrimagingError):
    """Residual energy is zero: the data vector is proportional to the
    steering vector, so ratio statistics are undefined."""


class ZeroXi(TrimagingError):
    """Harmonic mean undefined when any per-frequency ratio is exactly zero."""


class SeriesNonConvergence(TrimagingError):
    """Poisson-mixture series truncation exceeded the term cap."""


class UnsupportedStatistic(TrimagingError):
    """No closed-form law is available for the requested statistic."""


class ConfigError(TrimagingError):
    """Invalid or inconsistent scenario configuration."""
