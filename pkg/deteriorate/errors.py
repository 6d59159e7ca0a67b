"""
Exception hierarchy shared by every sub-package.

Each class carries the process exit code the command line maps it to.
"""

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class DeteriorateError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = EXIT_INTERNAL


class ConfigError(DeteriorateError, ValueError):
    """Invalid configuration file or parameter."""

    exit_code = EXIT_USAGE


class DataError(DeteriorateError, ValueError):
    """Input data violates a contract of the data model."""

    exit_code = EXIT_DATA


class ParseError(DataError):
    """A delimited-text row could not be parsed.

    Attributes:
        line (int | None): 1-based line number in the source file (header is line 1)
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderingError(ParseError):
    """Timestamps are not strictly increasing."""


class DomainError(DataError):
    """A value or argument lies outside the domain an operation accepts."""


class CohortError(DataError):
    """Cross-file inconsistency in a cohort directory.

    Attributes:
        patient_id (str | None): the patient the inconsistency concerns
    """

    def __init__(self, message, patient_id=None):
        self.patient_id = patient_id
        if patient_id is not None:
            message = f"patient {patient_id}: {message}"
        super().__init__(message)


class InvariantError(DeteriorateError, RuntimeError):
    """An internal invariant was violated."""

    exit_code = EXIT_INTERNAL
