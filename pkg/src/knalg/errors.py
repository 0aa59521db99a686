"""Exception hierarchy shared by all knalg modules."""


class KnalgError(Exception):
    """Base class for every error raised by this package."""


class WindowError(KnalgError):
    """A coefficient above the truncation order of a series was requested.

    Raised instead of silently returning zero: coefficients at or above
    ``trunc_order`` are unknown, not absent.
    """


class DegenerateParameterError(KnalgError):
    """A parameter combination makes a defining expression ill-posed
    (q = 1 in a q-division, a vanishing denominator bracket, a scaling
    factor of zero)."""


class LeadingOrderError(KnalgError):
    """The declared leading order of a local expansion is inconsistent
    with the sampled function values."""


class SamplingError(KnalgError):
    """Contour sampling failed: too few samples, or a non-finite value on
    the sampling circle (a singularity sits on or too near the contour)."""


class BasisError(KnalgError):
    """Basis construction or validation failed (degenerate surface data,
    duality residual above tolerance, exponent-law violation)."""


class SchemaError(KnalgError):
    """A basis or config file does not match the documented schema."""


class ConfigError(KnalgError):
    """Invalid run configuration (bad flag value, inconsistent ranges)."""
