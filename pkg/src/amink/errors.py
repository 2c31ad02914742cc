"""Exception hierarchy shared by all modules."""


class AminkError(ValueError):
    """Base class for validation errors raised by the library."""


class EmptyInput(AminkError):
    pass


class OriginNotInteriorError(AminkError):
    pass


class DimTooLarge(AminkError):
    pass


class DimMismatch(AminkError):
    pass


class ZeroDirection(AminkError):
    pass


class ZeroScale(AminkError):
    pass


class NegativeDim(AminkError):
    pass


class OutOfDomain(AminkError):
    pass


class RankDeficient(AminkError):
    pass


class EmptyCloud(AminkError):
    pass


class NonpositiveRadius(AminkError):
    pass


class BadResolution(AminkError):
    pass


class ScheduleTooShort(AminkError):
    pass


class ScheduleNotDecreasing(AminkError):
    pass


class ResolutionTooCoarse(AminkError):
    pass


class UnsupportedShape(AminkError):
    pass


class UnknownScenario(AminkError):
    pass


class NumericFailure(RuntimeError):
    """A computation finished but its result cannot be trusted (e.g. divergence)."""
