"""Exception hierarchy shared by every odkit module."""


class OdkitError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(OdkitError, ValueError):
    """Matrix shapes do not conform."""


class CertificationError(OdkitError):
    """A construction produced an object that failed its own verifier.

    Raised only when the failure indicates a bug or bad inputs; ordinary
    verification failures are returned as report values.
    """


class SearchError(OdkitError):
    """An exhaustive or bounded search found nothing within its budget."""


class BudgetExceeded(SearchError):
    """The configured size cap or node budget was hit before completion."""


class PlugInError(OdkitError):
    """Plug-in matrices violate amicability or the sum property."""


class MatrixFormatError(OdkitError, ValueError):
    """Malformed matrix file; ``line`` and ``column`` locate the problem."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", token {column}" if column is not None else "") + ": "
        super().__init__(where + message)
