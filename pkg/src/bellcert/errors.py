"""Exception hierarchy shared by all modules.

Three families map onto the CLI exit codes: input that cannot be parsed,
input that parses but violates a domain contract, and failures inside a
numerical routine.
"""


class BellcertError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DataFormatError(BellcertError):
    """Malformed input file (bad line, unknown field, wrong token)."""

    exit_code = 2

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message)


class DomainError(BellcertError, ValueError):
    """Arguments outside an operation's documented domain."""

    exit_code = 3


class ComputationError(BellcertError):
    """A numerical routine could not produce a result (e.g. empty cell)."""

    exit_code = 4
