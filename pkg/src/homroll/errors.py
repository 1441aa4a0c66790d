"""Exception hierarchy shared by all homroll modules."""


class HomrollError(Exception):
    """Base class for every error raised by homroll."""


class NonSquare(HomrollError, ValueError):
    pass


class NonFinite(HomrollError, ArithmeticError):
    pass


class OddPanels(HomrollError, ValueError):
    pass


class NotClosed(HomrollError, ValueError):
    """Coordinate extraction left a residual: the matrix is outside the span of the basis."""


class TooFarFromGroup(HomrollError, ValueError):
    pass


class SingularSplit(HomrollError, ValueError):
    pass


class StateInvariantViolated(HomrollError, ArithmeticError):
    pass


class BadAlpha(HomrollError, ValueError):
    pass


class BadBasePoint(HomrollError, ValueError):
    pass


class NotSkew(HomrollError, ValueError):
    pass


class NotTangent(HomrollError, ValueError):
    pass


class RelationViolated(HomrollError, ArithmeticError):
    pass


class ConfigError(HomrollError, ValueError):
    pass
