from typing import Optional


class OperadForgeError(Exception):
    """Base class for every error raised by the engine"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self._render())

    def _render(self) -> str:
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"


class ParseError(OperadForgeError):
    """Malformed presentation text or order text"""


class ArityMismatchError(OperadForgeError):
    """Label count, slot or permutation length does not fit an arity"""


class UnknownGeneratorError(OperadForgeError):
    """A monomial refers to a generator that is not declared"""


class KindMismatchError(OperadForgeError):
    """An operation was applied to the wrong algebra kind"""


class TruncationError(OperadForgeError):
    """A computation cannot be bounded by the requested truncation"""


class NotQuadraticError(OperadForgeError):
    """Quadratic duality was asked for a presentation with non-quadratic relations"""


class DegreeError(OperadForgeError):
    """Homological degrees are inconsistent"""


class DifferentialError(OperadForgeError):
    """A differential does not square to zero or does not preserve relations"""

    def __init__(self, message: str, slice_info: Optional[dict] = None):
        self.slice_info = slice_info or {}
        super().__init__(message)


class GeneratorMismatchError(OperadForgeError):
    """Two presentations cannot be paired generator by generator"""


class InvalidFamilyError(OperadForgeError):
    """Unknown family id or invalid family parameter"""


class ConfigurationError(OperadForgeError):
    """Invalid environment configuration"""
