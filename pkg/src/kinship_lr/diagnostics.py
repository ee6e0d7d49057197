"""Located diagnostics shared by the model language, table and pedigree checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True, order=True)
class Diagnostic:
    line: int
    column: int
    code: str
    message: str
    severity: str = ERROR

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.column}: {self.severity} {self.code}: {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Stable report order: by location, then code."""
    return sorted(diags, key=lambda d: (d.line, d.column, d.code, d.message))


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)
