"""Shared exception types.

Budget exhaustion is deliberately a distinct error everywhere: callers must be
able to tell "proved unsat" from "gave up".
"""


class QuantsatError(Exception):
    """Base class for all package errors."""


class ParseError(QuantsatError):
    """Syntax error in a formula or instance file; carries a position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" at line {line}" if column is None else f" at line {line}, column {column}"
        elif column is not None:
            where = f" at column {column}"
        super().__init__(message + where)


class BudgetExceeded(QuantsatError):
    """A configured resource budget (conflicts, pivots, iterations, nodes) ran out."""
