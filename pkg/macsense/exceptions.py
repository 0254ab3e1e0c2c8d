"""
Error types
Every failure raised by macsense derives from MacsenseError and from the
builtin exception a caller would naturally catch.
"""

from typing import Optional


class MacsenseError(Exception):
    """Base class for all macsense errors"""


class UnknownVariableError(MacsenseError, KeyError):
    """A variable or alphabet name is not known to the object it was looked up in"""

    def __init__(self, name: str, known=()):
        self.name = name
        self.known = tuple(known)
        message = f"unknown variable '{name}'"
        if self.known:
            message += f" (known: {', '.join(self.known)})"
        super().__init__(message)

    def __str__(self):
        return self.args[0]


class ArgumentError(MacsenseError, ValueError):
    """Arguments are individually valid but inconsistent with each other"""


class DomainError(MacsenseError, ValueError):
    """A numeric parameter lies outside its admissible range"""


class NormalizationError(MacsenseError, ValueError):
    """A pmf or kernel slice does not sum to one"""

    def __init__(self, message: str, cell: Optional[tuple] = None, deficit: Optional[float] = None):
        self.cell = cell
        self.deficit = deficit
        super().__init__(message)


class ShapeError(MacsenseError, ValueError):
    """A tensor dimension does not match the alphabet it is declared over"""

    def __init__(self, message: str, variable: Optional[str] = None):
        self.variable = variable
        super().__init__(message)


class ConfigurationError(MacsenseError, ValueError):
    """Missing or contradictory configuration (distortion tables, run options)"""


class PreconditionError(MacsenseError, ValueError):
    """An operation was called on an input it is not defined for"""


class InternalConsistencyError(MacsenseError, RuntimeError):
    """A mathematical identity that must hold by construction was violated"""


class DocumentError(MacsenseError, ValueError):
    """A channel or scheme document could not be parsed or validated"""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.column = column
        self.key = key
        location = []
        if key:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}, column {column}")
        if location:
            message = f"{message} ({'; '.join(location)})"
        super().__init__(message)
