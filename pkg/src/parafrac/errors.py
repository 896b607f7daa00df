"""Exception hierarchy shared by all parafrac modules."""


class ParafracError(Exception):
    """Base class for every error raised by this package."""


# series algebra
class NotInvertible(ParafracError):
    pass


class NotParabolic(ParafracError):
    pass


class InsufficientOrder(ParafracError):
    pass


# dynamics
class AmbiguousSector(ParafracError):
    pass


class LeftSector(ParafracError):
    pass


class IterationCap(ParafracError):
    pass


# geometry
class OutOfRange(ParafracError, ValueError):
    pass


class OrbitTooShort(ParafracError):
    pass


class BudgetUnreachable(ParafracError):
    pass


# asymptotics / recovery
class InsufficientSamples(ParafracError):
    pass


class IllConditioned(ParafracError):
    pass


class Degenerate(ParafracError):
    pass


class RequiresNormalForm(ParafracError):
    pass


class AmbiguousK(ParafracError):
    pass


class DegenerateImaginaryPart(ParafracError):
    pass


class ConfigError(ParafracError):
    pass
