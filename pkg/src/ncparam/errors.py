"""Shared exception types."""


class NcparamError(Exception):
    """Base class for all package errors."""


class StructuralError(NcparamError):
    """Operands violate a structural contract (registry mismatch, bad shapes)."""


class GraphBuildError(NcparamError):
    """A graph description is semantically invalid."""


class GraphParseError(NcparamError):
    """A graph file is syntactically invalid; carries the source location."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ConstraintError(NcparamError):
    """Model-parameter constraint violated (needs theta^2*m^4/4 >= a > 0)."""


class InternalCheckError(NcparamError):
    """An internal consistency check failed; indicates a bug, not bad input."""
