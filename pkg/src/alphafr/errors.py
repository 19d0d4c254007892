"""Exception hierarchy shared by every module."""


class AlphaFRError(Exception):
    """Base class for all library errors."""


class DimensionError(AlphaFRError, ValueError):
    """Arrays or grids that should match do not."""


class DomainError(AlphaFRError, ValueError):
    """A value lies outside the domain of a formula (e.g. nonpositive density)."""


class ConfigurationError(AlphaFRError, ValueError):
    """Invalid construction parameters or solver controls."""


class ContractViolation(AlphaFRError, ValueError):
    """A documented precondition (mass, tangency, decay) does not hold."""


class OutOfChartError(DomainError):
    """A function lies outside the image of a chart map."""


class GeodesicEscape(AlphaFRError):
    """A geodesic left the manifold before the requested time.

    Attributes
    ----------
    blowup_time : float or None
        Exit time predicted in closed form, when known.
    terminal : str or None
        Terminal flag reported by the tau integrator, when applicable.
    escape_time : float or None
        First requested time at which evaluation failed.
    """

    def __init__(self, message, blowup_time=None, terminal=None, escape_time=None):
        super().__init__(message)
        self.blowup_time = blowup_time
        self.terminal = terminal
        self.escape_time = escape_time


class ConvexityViolation(AlphaFRError):
    """The boundary-value solver failed to reach tau = 1."""
