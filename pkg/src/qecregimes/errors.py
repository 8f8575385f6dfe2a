"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SchemaError(ValueError):
    """An input file does not match the expected table layout."""


class NonConvergenceError(RuntimeError):
    """An iterative fit did not converge within its budget."""


class SyndromeError(ValueError):
    """A syndrome cannot be matched (odd defect count on a closed surface)."""


class BudgetExceeded(RuntimeError):
    """Branch-and-bound exceeded its node budget for a single shot."""
