"""Exception taxonomy.

Three families map onto the CLI exit codes: configuration problems (exit 2),
data problems (exit 3), and numerical degeneracies (exit 4).
"""


class HybridPlsError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HybridPlsError, ValueError):
    """Invalid configuration (bad basis settings, scenario names, plans)."""


class InvalidBasisConfig(ConfigError):
    """Basis parameters are inconsistent (e.g. fewer functions than degree+1)."""


class UnknownScenario(ConfigError):
    """Requested simulation scenario does not exist."""


class FoldTooSmall(ConfigError):
    """A cross-validation fold would leave fewer than two training rows."""


class IndexOutOfRange(ConfigError):
    """Component index exceeds what a fitted model provides."""


class DataError(HybridPlsError):
    """Problems with user-supplied data (files, shapes, empty input)."""


class IngestionError(DataError):
    """Malformed dataset file; message carries file/row/column coordinates."""

    def __init__(self, message, path=None, row=None, column=None):
        loc = str(path) if path is not None else ""
        if row is not None:
            loc += f", row {row}"
        if column is not None:
            loc += f", column {column}"
        if loc:
            message = f"{message} ({loc})"
        super().__init__(message)
        self.path = path
        self.row = row
        self.column = column


class ShapeMismatch(DataError):
    """Blocks that must share dimensions do not."""


class EmptyInput(DataError):
    """An operation received zero samples."""


class DomainError(DataError):
    """Evaluation point outside the basis domain [0, 1]."""


class NumericalError(HybridPlsError):
    """Degenerate numerical situations detected at run time."""


class RankDeficient(NumericalError):
    """Least-squares design matrix does not have full column rank."""


class ZeroVariancePredictor(NumericalError):
    """A predictor block or column is constant and cannot be standardized."""


class DegenerateScalarBlock(NumericalError):
    """Scalar block has zero total energy; omega is undefined."""


class DegenerateResponse(NumericalError):
    """Response is (numerically) uncorrelated with every predictor."""


class ZeroScoreVector(NumericalError):
    """PLS scores vanished; predictor signal rank is exhausted."""


class DegenerateScale(NumericalError):
    """Scaled RMSE undefined because sd(y_true) is zero."""


class RankDeficientScores(NumericalError):
    """Pooled principal-component score matrix is singular."""


class ZeroTruthNorm(NumericalError):
    """Relative error undefined because the true coefficient has zero norm."""
