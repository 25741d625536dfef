"""Exception types raised across the package."""


class GDWError(ValueError):
    """Base class for every validation error raised by :mod:`gdw`."""


class InvalidDimensionError(GDWError):
    pass


class StructureParseError(GDWError):
    """Malformed structure string; ``offset`` is the byte offset of the bad token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(GDWError):
    """An argument lies outside the mathematical domain of a function."""


class NoClicksError(GDWError):
    pass


class ClickLogError(GDWError):
    """Malformed click log; ``line`` is the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
