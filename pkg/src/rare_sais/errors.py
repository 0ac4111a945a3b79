"""Exception types raised across the package."""


class RareSaisError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(RareSaisError, ValueError):
    pass


class DimensionMismatch(RareSaisError, ValueError):
    pass


class EmptyInput(RareSaisError, ValueError):
    pass


class AllZeroWeights(RareSaisError, ValueError):
    pass


class ZeroDenominator(RareSaisError, ArithmeticError):
    """Ledoit-Wolf denominator vanishes (isotropic intermediate covariance)."""


class AllImpossible(RareSaisError, ValueError):
    """Every log-weight is -inf, so weights cannot be normalized."""


class EmptyBatch(RareSaisError, ValueError):
    pass


class NoSeedsAnywhere(RareSaisError, RuntimeError):
    """No proposal produced a sample inside the previous intermediate event."""


class NoFailureSamples(RareSaisError, RuntimeError):
    pass


class DegenerateMixture(RareSaisError, RuntimeError):
    pass


class ZeroReference(RareSaisError, ValueError):
    pass


class AllZeroEstimates(RareSaisError, ValueError):
    pass


class ZeroMean(RareSaisError, ValueError):
    pass


class ParseError(RareSaisError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(RareSaisError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class MissingSweepAxis(RareSaisError, ValueError):
    pass
