"""Domain errors. Every error raised by the library derives from FlatError."""


class FlatError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class SurfSyntaxError(FlatError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        loc = f"line {line}" + (f", column {column}" if column else "")
        super().__init__(f"{loc}: {message}" if line else message)


class GluingMismatch(FlatError):
    pass


class AngleError(FlatError):
    pass


class NotConnected(FlatError):
    pass


class InvalidPolygon(FlatError):
    pass


class DegenerateMatrix(FlatError):
    pass


class AlreadyOrientable(FlatError):
    pass


class DimensionMismatch(FlatError):
    pass


class InvalidTangentSpace(FlatError):
    pass


class InvolutionMismatch(FlatError):
    pass


class NotProduct(FlatError):
    pass


class BadDirection(FlatError):
    pass


class NotPeriodic(FlatError):
    pass


class NotParallel(FlatError):
    pass


class NotGeneric(FlatError):
    pass


class BadPivot(FlatError):
    pass


class NoDegeneration(FlatError):
    pass


class NoCollapse(FlatError):
    pass


class WholeSurface(FlatError):
    pass


class NotDivergent(FlatError):
    pass


class DichotomyViolation(FlatError):
    pass


class FirstReturnHitsSingularity(FlatError):
    pass


class NotRel(FlatError):
    pass


class StarNotEmbedded(FlatError):
    pass


class StarsOverlap(FlatError):
    pass


class NotReducing(FlatError):
    pass


class AssumptionFails(FlatError):
    pass


class NoCertificate(FlatError):
    pass


class TrappedChase(FlatError):
    pass
