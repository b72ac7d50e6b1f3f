"""Exception hierarchy.

Every error carries a stable process exit code so the CLI can map failures
to return values without a lookup table.
"""


class FCSError(Exception):
    exit_code = 1


class ParseError(FCSError):
    exit_code = 2


class ShapeError(FCSError):
    exit_code = 2


class NormalizationError(FCSError):
    exit_code = 3


class ResourceCapError(FCSError):
    exit_code = 4


class NoStationaryState(FCSError):
    exit_code = 5


class NotFaithful(FCSError):
    exit_code = 6


class NotErgodic(FCSError):
    exit_code = 7


class PreconditionError(FCSError):
    exit_code = 8


class NoIntertwiner(FCSError):
    exit_code = 9


class NotCovariant(FCSError):
    exit_code = 10


class NotIrreducible(FCSError):
    exit_code = 11


class QuadratureNotConverged(FCSError):
    exit_code = 12


class UnknownModel(FCSError):
    exit_code = 13


class DimensionMismatch(FCSError):
    exit_code = 14


class IncompleteBundle(FCSError):
    exit_code = 15


class ConvergenceError(FCSError):
    exit_code = 16
