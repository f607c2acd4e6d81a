"""Exception hierarchy shared by every imopt module."""


class ImoptError(Exception):
    """Base class for library errors."""


class DomainError(ImoptError, ValueError):
    pass


class DimensionMismatch(ImoptError, ValueError):
    pass


class InvalidArgument(ImoptError, ValueError):
    pass


class UnsupportedSet(ImoptError):
    pass


class UnsupportedCombination(ImoptError):
    pass


class InnerSolveFailure(ImoptError, RuntimeError):
    pass


class LineSearchDiverged(ImoptError, RuntimeError):
    """Backtracking grew L by 2**60 without satisfying the exit test."""


class NotOneStronglyConvex(ImoptError):
    pass


class MaxIterExceeded(ImoptError, RuntimeError):
    pass


class MaxOuterExceeded(ImoptError, RuntimeError):
    pass


class ScaleError(ImoptError, ValueError):
    pass


class GapOracleUnavailable(ImoptError):
    pass


class ConfigError(ImoptError, ValueError):
    pass
