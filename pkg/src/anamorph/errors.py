"""Exception hierarchy.

Every error raised by the library derives from :class:`AnamorphError`, so
callers (the CLI in particular) can map families of failures onto exit codes.
"""


class AnamorphError(Exception):
    """Base class for all library errors."""


class InputError(AnamorphError, ValueError):
    """Malformed input: wrong shape, invalid state, schema mismatch."""


class ConditionError(AnamorphError):
    """A feasibility condition of the scheme is violated."""


class ReconstructionError(AnamorphError):
    """Decoding, reconstruction, or a self-check failed."""


# linear algebra
class NotHermitian(InputError):
    pass


class NoConvergence(AnamorphError):
    pass


class NegativeEigenvalueForSqrt(InputError):
    pass


class DimensionMismatch(InputError):
    pass


# operational primitives
class TooLarge(InputError):
    pass


class LambdaOutOfRange(InputError):
    pass


# scheme
class NotStrictlyPositive(ConditionError):
    pass


class EtaInfeasible(ConditionError):
    pass


class EtaTooSmallForDilation(ConditionError):
    pass


class NoCovertSignal(ReconstructionError):
    def __init__(self, message, matrix=None):
        super().__init__(message)
        self.matrix = matrix


# tomography
class UnsupportedDesign(InputError):
    pass


class EmptyBranch(ReconstructionError):
    pass


class NoShotsInBranch(ReconstructionError):
    pass


# metrics
class TooLargeForBruteForce(InputError):
    pass


class UnsupportedDims(InputError):
    pass


# sharing
class FieldTooSmall(InputError):
    pass


class DuplicatePoints(InputError):
    pass


class InvalidPair(InputError):
    pass


class ThresholdUnmet(ReconstructionError):
    pass


class CovertUnavailable(ReconstructionError):
    pass


# serialization
class SchemaViolation(InputError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class CheckFailed(ReconstructionError):
    """A built-in acceptance check did not hold."""
