"""Exception hierarchy shared across the package.

The classes are grouped by how the command-line layer maps them to exit
codes: data/ingestion problems exit with 2, statistical/numeric failures
with 3 (usage errors exit with 1 and never reach these classes).
"""


class EvtcvError(Exception):
    """Base class for all package-specific failures."""


# --- data / ingestion (CLI exit code 2) ---

class DataError(EvtcvError):
    """Base class for input-data problems."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingTargetColumn(DataError):
    pass


class EmptyAfterPreprocessing(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class NonFiniteInput(DataError):
    pass


# --- statistical / numeric (CLI exit code 3) ---

class NumericError(EvtcvError):
    """Base class for statistical and fitting failures."""


class DegenerateSample(NumericError):
    """All sample values identical; a tail distribution cannot be fitted."""


class TooFewSamples(NumericError):
    pass


class ThresholdViolation(NumericError):
    pass


class BootstrapDegenerate(NumericError):
    """More than the tolerated share of bootstrap replicates failed to fit."""


class EmptySplit(NumericError):
    pass


class AllSplitsFailed(NumericError):
    pass


class NoExceedances(NumericError):
    pass


class NoValidThreshold(NumericError):
    pass
