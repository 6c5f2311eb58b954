"""Exception hierarchy shared by every module."""


class RankDisparityError(Exception):
    """Base class for all package errors."""


class InvalidInput(RankDisparityError, ValueError):
    """Input violates a documented precondition."""


class DomainError(RankDisparityError, ValueError):
    """A value falls outside the domain of a transform or index."""


class DegenerateReference(DomainError):
    """The disparity reference evaluates to zero."""


class DegenerateRegression(DomainError):
    """The rank regressor has zero weighted variance (nu == 1)."""


class DegenerateTest(DomainError):
    """A significance test has zero variance."""


class EmptyGroup(InvalidInput):
    """A group has zero weighted population in the survey totals."""


class DesignError(InvalidInput):
    """The survey design cannot support variance estimation."""


class ParseError(InvalidInput):
    """Malformed input file. ``row`` is 1-based and counts the header."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row
