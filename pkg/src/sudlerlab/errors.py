"""Exception hierarchy shared by all sudlerlab modules."""


class SudlerLabError(Exception):
    """Base class for every error raised by this package."""


class SpecParseError(SudlerLabError, ValueError):
    """An alpha specification string does not match the grammar."""


class PrecisionExhausted(SudlerLabError):
    """A source cannot supply enough trustworthy partial quotients."""


class NotQuadratic(SudlerLabError):
    """Operation requires an eventually periodic (quadratic) source."""


class Unsupported(SudlerLabError):
    """No closed form is available for the requested constant."""


class HypothesisViolated(SudlerLabError):
    """Source has no declared polynomial bound on its partial quotients."""


class InvalidInterval(SudlerLabError, ValueError):
    """Indicator endpoints violate 0 <= a < b <= 1, 0 < b - a < 1."""


class TruncationFlagged(SudlerLabError):
    """A Fourier model is shorter than the cutoff the prediction needs."""


class ToleranceNotMet(SudlerLabError):
    """Adaptive quadrature could not certify the requested tolerance."""


class SingularitySuspect(SudlerLabError):
    """A point of the orbit is too close to a singularity to trust.

    ``index`` is the offending n (or m), ``distance`` the computed distance
    and ``error`` the accumulated absolute error bound at that point.
    """

    def __init__(self, index, distance, error, what="||n alpha||"):
        self.index = int(index)
        self.distance = float(distance)
        self.error = float(error)
        super().__init__(
            f"{what} at n={self.index} is {self.distance:.3e}, within the guard "
            f"band of its error bound {self.error:.3e}; raise precision"
        )
