"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
TrainingDiverged -> 3.
"""


class AigemError(Exception):
    """Base class for package errors."""


class ConfigError(AigemError):
    """Invalid run configuration or command usage."""


class DataError(AigemError):
    """Input data violates a contract (bad rows, impossible values)."""


class DataFormatError(DataError):
    """Input file does not match the expected schema."""


class TrainingDiverged(AigemError):
    """Training produced a non-finite loss."""
