"""Exception taxonomy shared by all genokit modules.

Every error carries a short machine-parsable ``category`` used by the CLI
to emit one-line error reports with stable exit codes.
"""


class GenokitError(Exception):
    """Base class for all genokit errors."""

    category = "error"


class FormatError(GenokitError):
    """A binary file does not match its expected format (bad magic, mode)."""

    category = "format"


class ConsistencyError(GenokitError):
    """Files or arrays that must agree in size/shape do not."""

    category = "consistency"


class ParseError(GenokitError):
    """A text metadata file has a malformed line."""

    category = "parse"

    def __init__(self, message, path=None, line=None):
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class ArgumentError(GenokitError, ValueError):
    """An argument is out of its documented range."""

    category = "argument"


class DataError(GenokitError):
    """Input data violates a precondition (e.g. missing values where forbidden)."""

    category = "data"


class StructureError(GenokitError):
    """A pedigree violates structural invariants (cycles, half-specified parents)."""

    category = "structure"


class WindowError(GenokitError):
    """An imputation window is too narrow or otherwise unusable."""

    category = "window"


class NumericError(GenokitError):
    """A numeric operation failed beyond recovery (singularities, non-finite values)."""

    category = "numeric"


class ModelError(GenokitError):
    """A statistical model is mis-specified (rank deficiency, bad components)."""

    category = "model"


class JoinError(GenokitError):
    """Subject identifiers in two inputs cannot be matched."""

    category = "join"
