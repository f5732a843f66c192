"""Exception and warning types shared across the package."""


class SpinRatchetError(Exception):
    """Base class for all package-specific errors."""


class InvalidSweep(SpinRatchetError):
    """Sweep configuration violates a precondition (zero bandwidth, zero rate, ...)."""


class InvalidDrive(SpinRatchetError):
    """Drive configuration violates a precondition (negative power, ...)."""


class NoCrossingInBandwidth(SpinRatchetError):
    """Eigen-gap scan found no local gap minimum inside the sweep window."""


class StepTooCoarse(SpinRatchetError):
    """Time discretization too coarse for the requested dynamics."""


class InsufficientSamples(SpinRatchetError):
    """Not enough samples inside the requested analysis window."""


class NoInteriorMaximum(SpinRatchetError):
    """Objective maximum sits on the search-window boundary."""


class FitDiverged(SpinRatchetError):
    """Nonlinear fit produced a non-finite cost."""


class DegenerateX(SpinRatchetError):
    """Regression abscissa values are all identical."""


class FitAmbiguous(UserWarning):
    """Fit covariance is ill-conditioned; parameters are reported but weakly determined."""
