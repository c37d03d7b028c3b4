"""Exception types raised across the package.

Solvers additionally report non-fatal conditions (non-convergence, stalls,
singular Gram matrices) as flags on their fit results instead of raising.
"""


class SimplexFactorError(Exception):
    """Base class for all package-specific errors."""


class ZeroRowError(SimplexFactorError):
    """A matrix row sums to zero where a positive row sum is required."""


class ZeroColumnError(SimplexFactorError):
    """A matrix column sums to zero where a positive column sum is required."""


class ZeroMatrixError(SimplexFactorError):
    """The matrix grand total is zero where a positive total is required."""


class NegativeEntryError(SimplexFactorError):
    """A negative entry appeared where nonnegative data is required."""


class RankOutOfRangeError(SimplexFactorError):
    """Requested rank is outside 1..min(rows, cols)."""


class DegenerateBasisError(SimplexFactorError):
    """A zero basis row made the constrained least-squares problem insoluble."""


class ZeroClassMassError(SimplexFactorError):
    """A latent class received zero total mass during conversion."""


class ZeroRowBasisError(SimplexFactorError):
    """A basis row sums to zero, blocking row normalization."""


class ZeroRowProductError(SimplexFactorError):
    """A row of the reconstructed product sums to zero, blocking conversion."""


class InfeasibleTransformError(SimplexFactorError):
    """Applying a transformation matrix produced negative factor entries."""


class RankDeficientSelectionError(SimplexFactorError):
    """Successive projection ran out of independent rows before k picks."""


class DegenerateFitError(SimplexFactorError):
    """The requested fit is structurally impossible for the given data."""


class UnsupportedKError(SimplexFactorError):
    """The operation only supports a specific number of components."""


class ParseError(SimplexFactorError):
    """A data file could not be parsed.

    Carries the 1-based row and column location when known.
    """

    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.col = col


class RaggedRowError(ParseError):
    """A CSV row has a different number of cells than the header."""
