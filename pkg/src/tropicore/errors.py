"""Exception types shared across the package."""


class TropicoreError(Exception):
    """Base class; the CLI maps these to exit code 1 unless noted otherwise."""


class DimensionMismatch(TropicoreError):
    pass


class CompositionNonzero(TropicoreError):
    pass


class ParseError(TropicoreError):
    def __init__(self, message: str, line: int | None = None, position: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position:
            where.append(position)
        super().__init__(f"{message}" + (f" ({', '.join(where)})" if where else ""))
        self.line = line
        self.position = position


class UnknownFace(TropicoreError):
    pass


class InvalidRankFunction(TropicoreError):
    pass


class LooplessRequired(TropicoreError):
    pass


class NotCodimOne(TropicoreError):
    pass


class NotAFacePair(TropicoreError):
    pass


class NotDivisible(TropicoreError):
    pass


class NotBalanced(TropicoreError):
    pass


class NotPurelySkeletal(TropicoreError):
    pass


class NotACycle(TropicoreError):
    pass


class NotACocycle(TropicoreError):
    pass


class DeformationTooLarge(TropicoreError):
    def __init__(self, message: str, bound=None):
        super().__init__(message)
        self.bound = bound


class ChartMismatch(TropicoreError):
    pass


class NotTransversal(TropicoreError):
    pass


class NotSpanning(TropicoreError):
    pass


class NotCertified(TropicoreError):
    pass


class TwistOutOfRange(TropicoreError):
    pass


class IdentityFails(TropicoreError):
    pass


class InvalidSpace(TropicoreError):
    pass
