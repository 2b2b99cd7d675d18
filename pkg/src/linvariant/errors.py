"""Exception hierarchy shared by every module of the package."""


class LInvariantError(Exception):
    """Base class for all package errors."""


class InputError(LInvariantError):
    """Malformed or out-of-domain input."""


class ConditionFailure(LInvariantError):
    """A structural condition (semisimplicity, admissibility, C4, C5...) fails."""


# linear algebra
class InconsistentSystem(LInvariantError):
    pass


class PrecisionExhausted(LInvariantError):
    pass


class DimensionMismatch(InputError):
    pass


class NotSemisimpleAtZero(ConditionFailure):
    pass


class OutOfDomain(InputError):
    pass


# filtered modules
class PrimeMismatch(InputError):
    pass


class PhiNotScalar(ConditionFailure):
    pass


class FlagNotStable(ConditionFailure):
    pass


class EigenvalueNotRational(ConditionFailure):
    pass


class NotPhiNStable(ConditionFailure):
    pass


class PreconditionFailed(ConditionFailure):
    pass


# cohomology
class DegreeOverflow(InputError):
    pass


class NotStrictExact(ConditionFailure):
    pass


# rank-one coordinates
class UnsupportedCharacter(InputError):
    pass


class WrongParent(InputError):
    pass


class TargetH2Vanishes(InputError):
    pass


# series oracle
class WindowExhausted(LInvariantError):
    pass


class SingularDiagonal(LInvariantError):
    def __init__(self, degree, message=None):
        self.degree = degree
        super().__init__(message or f"zero diagonal entry at degree {degree}")


# engine
class C4Violation(ConditionFailure):
    pass


class RankDefect(ConditionFailure):
    pass


class RhoCNotInvertible(ConditionFailure):
    pass


class GlobalLocalMismatch(ConditionFailure):
    pass


class FormsDisagree(LInvariantError):
    pass


class ShapeMismatch(InputError):
    pass


class LineIsD1(InputError):
    pass


class DualizeFirst(ConditionFailure):
    """Raised when W_0 != 0 = W_1; carries the dualized input."""

    def __init__(self, dual_input, message="W_0 is nonzero and W_1 = 0: run on the dual input"):
        self.dual_input = dual_input
        super().__init__(message)


# cli
class SchemaError(InputError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class RationalParseError(InputError):
    pass
