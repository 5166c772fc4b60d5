"""Exception types shared across modules."""


class KKTError(Exception):
    pass


class MalformedInput(KKTError):
    pass


class InvariantViolation(KKTError):
    pass


class DegreeTooLarge(KKTError):
    pass


class MissingOrientation(KKTError):
    pass


class MissingLabels(KKTError):
    pass


class NonzeroConstantTerm(KKTError):
    pass


class BadXiParity(KKTError):
    pass


class EmptyV(KKTError):
    pass


class UnknownVertex(KKTError):
    pass


class Unclassifiable(KKTError):
    pass


class NotApplicable(KKTError):
    pass


class CancellationGap(KKTError):
    pass


class DegenerateScale(KKTError):
    pass


class DegenerateDirection(KKTError):
    pass


class OutsideNeighborhood(KKTError):
    pass


class NonUnit(KKTError):
    pass


class SingularSample(KKTError):
    pass


class CurvesTooClose(KKTError):
    pass


class NotClosed(KKTError):
    pass


class CoincidentPoints(KKTError):
    pass
