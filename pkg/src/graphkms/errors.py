"""Exception hierarchy. Every error carries a stable ``code`` string used by the CLI."""


class GraphKMSError(Exception):
    code = "ERROR"


class SchemaError(GraphKMSError):
    code = "SCHEMA"


class CommutationError(GraphKMSError):
    code = "COMMUTATION"

    def __init__(self, msg, i=None, j=None, v=None, w=None):
        super().__init__(msg)
        self.entry = (i, j, v, w)


class SquareBijectionError(GraphKMSError):
    code = "SQUARE_BIJECTION"


class HexagonError(GraphKMSError):
    code = "HEXAGON"


class ComposabilityError(GraphKMSError):
    code = "COMPOSABILITY"


class MatricesOnlyError(GraphKMSError):
    code = "MATRICES_ONLY"


class RangeError(GraphKMSError):
    # degree vector out of the admissible 0 <= m <= n <= d(p) window
    code = "RANGE"


class EmptyColorSetError(GraphKMSError):
    code = "EMPTY_COLOR_SET"


class DimensionError(GraphKMSError):
    code = "DIMENSION"


class NotSubinvariantError(GraphKMSError):
    code = "NOT_SUBINVARIANT"


class ConvergenceError(GraphKMSError):
    code = "CONVERGENCE"


class SpectralRadiusError(GraphKMSError):
    code = "SPECTRAL_RADIUS"


class NotAClassError(GraphKMSError):
    code = "NOT_A_CLASS"


class CertificationError(GraphKMSError):
    code = "CERTIFICATION"


class DegenerateKernelError(GraphKMSError):
    code = "DEGENERATE_KERNEL"


class NegativeMassError(GraphKMSError):
    code = "NEGATIVE_MASS"


class ResidualError(GraphKMSError):
    code = "RESIDUAL"


class GenerationError(GraphKMSError):
    code = "GENERATION"


class SupportError(GraphKMSError):
    code = "SUPPORT"


class IncompletePeriodicityWarning(UserWarning):
    """Off-diagonal evaluation consulted a periodicity group found by a bounded search."""
