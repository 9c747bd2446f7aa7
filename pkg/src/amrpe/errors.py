"""Exception hierarchy shared by every stage of the pipeline."""


class AmrpeError(Exception):
    """Base class for all errors raised by this package."""


class DataError(AmrpeError, ValueError):
    """Input data does not satisfy a documented precondition."""


# -- Penman / corpus ---------------------------------------------------------


class PenmanError(DataError):
    pass


class EmptyInput(PenmanError):
    pass


class UnbalancedParens(PenmanError):
    pass


class PenmanSyntaxError(PenmanError):
    pass


class DanglingVariable(PenmanError):
    pass


class DuplicateVariableDefinition(PenmanError):
    pass


class CycleDetected(PenmanError):
    pass


class ParseErrorAt(DataError):
    """A corpus block failed to parse; ``line`` is 1-based in the source stream."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


# -- labels / SPG --------------------------------------------------------------


class UnknownLabelShape(DataError):
    pass


class PointerRedefinition(DataError):
    pass


class MalformedSegment(DataError):
    pass


class DanglingPointer(DataError):
    pass


# -- numerics ------------------------------------------------------------------


class ConvergenceFailure(AmrpeError, ArithmeticError):
    pass


# -- encoding ------------------------------------------------------------------


class UnknownToken(DataError):
    pass


class EmptyTokenization(DataError):
    pass


class DuplicateVocabEntry(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


# -- metrics -------------------------------------------------------------------


class EmptyCorpus(DataError):
    pass


class UnknownFeature(DataError):
    pass


class IdMismatch(DataError):
    pass


# -- export --------------------------------------------------------------------


class MatrixFormatError(DataError):
    pass


class ChecksumMismatch(DataError):
    pass
