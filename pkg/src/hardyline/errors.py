"""Exception and warning types raised by hardyline."""


class HardylineError(Exception):
    """Base class for all hardyline errors."""


class InvalidParameter(HardylineError, ValueError):
    pass


class GridMismatch(HardylineError, ValueError):
    pass


class FrequencyOffGrid(HardylineError, ValueError):
    pass


class WraparoundRisk(HardylineError, ArithmeticError):
    """A spectral shift would carry mass across the Nyquist edge."""


class NotInSubspace(HardylineError, ValueError):
    pass


class BadNormalizer(HardylineError, ValueError):
    pass


class IntervalTooSmall(HardylineError, ValueError):
    pass


class DegenerateProfiles(HardylineError, ValueError):
    pass


class PreconditionViolation(HardylineError, ValueError):
    pass


class EmptyFamily(HardylineError, ValueError):
    pass


class WraparoundWarning(RuntimeWarning):
    pass


class NonzeroMeanWarning(RuntimeWarning):
    """Input to an H1 quantity carries a nonzero mean (bin 0)."""
