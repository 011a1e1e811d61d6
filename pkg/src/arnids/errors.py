"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class SchemaError(ValueError):
    """Schema file is invalid or does not match the data it describes."""


class DataError(ValueError):
    """A data file is malformed (bad cell, bad label, bad header)."""


class UsageError(ValueError):
    """An operation was invoked with arguments that cannot be honored."""


class NumericError(RuntimeError):
    """Training produced a non-finite value."""
