from dataclasses import dataclass
from typing import Optional, Sequence


class LedgerConsistencyError(KeyError):
    """Raised when an operation refers to a ledger entry that does not exist."""


class SchedulerStateError(RuntimeError):
    """Raised on an illegal state transition of a process, request or policy."""


class ConfigurationError(KeyError):
    """Raised when a referenced customer, policy or setting is unknown."""


@dataclass(frozen=True)
class Diagnostic:
    """
    A single finding of scenario validation.

    :param code: stable diagnostic code, e.g. `E105`
    :param path: dotted/indexed location of the offending field
    :param message: human readable explanation
    :param line: line number in the source file, when known
    :param column: column number in the source file, when known
    """
    code: str
    path: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self):
        location = self.path or '<root>'
        if self.line is not None:
            location = f"line {self.line}, column {self.column}: {location}"
        return f"{self.code} {location}: {self.message}"


class ScenarioValidationError(ValueError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
