"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SheetError(Exception):
    """Base class for all sheetlytics errors."""


class AddressError(SheetError, ValueError):
    pass


class FormulaSyntaxError(SheetError, ValueError):
    def __init__(self, message: str, position: int | None = None, text: str | None = None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class ProtectionError(SheetError):
    """Raised when a write would clobber a protected (role-bearing) cell."""


class RoleError(SheetError):
    pass


class UnknownAddressError(SheetError, KeyError):
    def __init__(self, addresses):
        self.addresses = list(addresses)
        names = ", ".join(str(a) for a in self.addresses)
        super().__init__(f"unknown address {names}")

    def __str__(self) -> str:
        return self.args[0]


class AnalysisError(SheetError, ValueError):
    pass


class WorkbookFormatError(SheetError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SpecFormatError(WorkbookFormatError):
    pass
