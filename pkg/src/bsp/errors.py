class BSPError(Exception):
    """Base class for errors raised by this package."""


class DataError(BSPError, ValueError):
    """Invalid input data: shapes, ids, values or covariates."""


class PreconditionError(BSPError, ValueError):
    """An argument is outside the range an operation is defined on."""
