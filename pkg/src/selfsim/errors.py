"""Exception hierarchy. The CLI maps each family to an exit code."""


class SelfSimError(Exception):
    pass


class AlphabetMismatch(SelfSimError, ValueError):
    pass


class CapExceeded(SelfSimError):
    """A configured size limit (level size, support size, ball size) was hit."""


class LevelSizeError(CapExceeded):
    pass


class PreconditionError(SelfSimError, ValueError):
    pass


class RowsDiffer(PreconditionError):
    pass


class RecurrenceFailure(PreconditionError):
    pass


class ClosureNotDetected(PreconditionError):
    pass


class ConfigError(SelfSimError, ValueError):
    """Malformed input text; carries a 1-based line (and optional column)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", col {column}" if column is not None else "") + ": "
        super().__init__(where + message)
