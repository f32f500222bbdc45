"""Exception hierarchy shared by every module."""


class KPBError(Exception):
    """Base class for all errors raised by kpburgers."""


class GridError(KPBError, ValueError):
    """Invalid grid sizes or box lengths."""


class ShapeMismatch(KPBError, ValueError):
    """Array shape does not match the grid."""


class ZeroMeanViolation(KPBError, ValueError):
    """Field has x-mean content, so the x anti-derivative is undefined."""


class NonPositiveTime(KPBError, ValueError):
    """Kernel requested at t <= 0."""


class QuadratureNonConvergence(KPBError, ArithmeticError):
    """Node or panel doubling hit its cap before reaching the tolerance."""


class BlowupDetected(KPBError, RuntimeError):
    """Solution became non-finite or grew far beyond its initial size."""


class DomainEscape(KPBError, RuntimeError):
    """Boundary monitor exceeded its threshold."""


class MissingFlux(KPBError, ValueError):
    """Trajectory was recorded without u^(p+1) snapshots."""


class InsufficientSamples(KPBError, ValueError):
    """Too few usable samples for a fit or a bound check."""


class DegenerateM(KPBError, ValueError):
    """The effective mass is numerically zero, so the lower bound is vacuous."""


class ConfigError(KPBError, ValueError):
    """Configuration failed to parse or validate."""


class RegistryError(KPBError, KeyError):
    """Unknown experiment or criterion name."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""
