"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SSRLError(Exception):
    exit_code = 1


class ValidationError(SSRLError, ValueError):
    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ShapeError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class SplitError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class NumericError(SSRLError, ArithmeticError):
    exit_code = 4
