"""Exception types shared across the package."""


class MucalError(Exception):
    """Base class for all library errors."""


class SortError(MucalError):
    """A term or formula violates the sort discipline."""


class UnknownSymbolError(MucalError):
    """A symbol is used without a declaration."""

    def __init__(self, symbol: str, message: str = ""):
        self.symbol = symbol
        super().__init__(message or f"unknown symbol: {symbol!r}")


class ParseError(MucalError):
    """Lex or parse failure, with a source position."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class KbError(MucalError):
    """A knowledge-base file failed validation."""


class OrderingError(MucalError):
    """A required moment ordering does not hold or is undeclared."""


class UnknownNameError(MucalError):
    """An agent or moment name is not declared in the KB."""


class ProofError(MucalError):
    """A proof obligation failed where success was required."""


class CheckError(MucalError):
    """The independent proof checker rejected a step."""
