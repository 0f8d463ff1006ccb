"""Exception hierarchy. Every error raised by the package derives from VBSError."""


class VBSError(Exception):
    pass


# graph parsing / validation
class GraphError(VBSError, ValueError):
    pass


class GraphSyntaxError(GraphError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NonPositiveMultiplicityError(GraphError):
    pass


class UnknownVertexError(GraphError):
    pass


class EmptyBlockError(GraphError):
    pass


class BlockIsWholeGraphError(GraphError):
    pass


# operators
class DimensionMismatchError(VBSError, ValueError):
    pass


class DimensionGuardError(VBSError):
    """Hilbert space larger than the configured guard (see NumericPolicy.max_dim)."""


class NormZeroError(VBSError, ValueError):
    pass


class JOutOfRangeError(VBSError, ValueError):
    pass


class ProjectorInstabilityError(VBSError, ArithmeticError):
    pass


class MissingCoefficientError(VBSError, KeyError):
    pass


class NonPositiveCoefficientError(VBSError, ValueError):
    pass


class UniquenessViolatedError(VBSError):
    pass


class NotBasicModelError(VBSError, ValueError):
    pass


class BlockTooSmallError(VBSError, ValueError):
    pass


class NonPositiveAlphaError(VBSError, ValueError):
    pass


class LOutOfRangeError(VBSError, ValueError):
    pass


class SpectrumMismatchError(VBSError):
    def __init__(self, message: str, table=None):
        super().__init__(message)
        self.table = table


class InsufficientSamplesError(VBSError, ValueError):
    pass
