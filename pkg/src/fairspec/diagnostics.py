"""Source positions and diagnostics shared by the lexer, parser and validator."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """A source location: 1-based line/column plus the length of the lexeme."""

    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    """One reported problem. `code` is a stable machine-readable slug."""

    code: str
    message: str
    span: Span | None = None

    def render(self) -> str:
        where = f"{self.span}: " if self.span is not None else ""
        return f"{where}error[{self.code}]: {self.message}"


# Diagnostic codes emitted by the front end.  Kept as constants so tests and
# the CLI never match on message text.
LEX_ERROR = "lex-error"
PARSE_ERROR = "parse-error"
UNRESOLVED_REFERENCE = "unresolved-reference"
MISSING_BINDING = "missing-binding"
KIND_MISMATCH = "kind-mismatch"
DUPLICATE_NAME = "duplicate-name"
NEGATIVE_TOLERANCE = "negative-tolerance"
INVALID_RANGE = "invalid-range"
INVALID_FRACTION = "invalid-fraction"
INVALID_ALPHA = "invalid-alpha"
IDENTICAL_GROUPS = "identical-groups"
INVALID_GROUPS = "invalid-groups"
UNKNOWN_METRIC = "unknown-metric"
MISSING_LABELS = "missing-labels"
OUTCOME_COLUMN = "outcome-column"
