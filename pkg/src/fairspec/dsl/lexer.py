"""Lossless tokenizer for the spec language.

Tokens keep the exact source lexeme plus the trivia (whitespace, comments,
skipped garbage) that preceded them, so concatenating `leading + lexeme` over
the stream reproduces the input byte for byte.  Lexical problems are reported
as diagnostics and never raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..diagnostics import LEX_ERROR, Diagnostic, Span

KEYWORDS = frozenset(
    {
        "bias",
        "kind",
        "group",
        "individual",
        "domain",
        "sources",
        "sensitive",
        "variable",
        "values",
        "positive",
        "outcome",
        "privileged",
        "unprivileged",
        "analysis",
        "scope",
        "dataset",
        "path",
        "map",
        "column",
        "top",
        "bottom",
        "metric",
        "require",
        "tolerance",
        "in",
        "log",
        "group_size",
        "probability",
        "expected",
        "sum",
        "and",
        "or",
        "not",
    }
)

# `prediction` and `ground_truth` are soft keywords: they head the optional
# label clause of a dataset block but stay usable as column names.
SOFT_KEYWORDS = frozenset({"prediction", "ground_truth"})

TWO_CHAR_PUNCT = ("->", "==", "!=", "<=", ">=")
ONE_CHAR_PUNCT = frozenset("{}[]():,=<>+-*/|")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | string | number | punct | eof
    lexeme: str
    span: Span
    value: object = None  # decoded payload for string/number tokens
    leading: str = field(default="", compare=False)  # trivia before the token

    def is_keyword(self, word: str) -> bool:
        return self.kind == "keyword" and self.lexeme == word

    def is_punct(self, text: str) -> bool:
        return self.kind == "punct" and self.lexeme == text


def _is_ident_start(ch: str) -> bool:
    return ch.isascii() and (ch.isalpha() or ch == "_")


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def _is_digit(ch: str) -> bool:
    # str.isdigit also accepts Unicode digits float() rejects.
    return "0" <= ch <= "9"


class _Lexer:
    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []
        self.diagnostics: list[Diagnostic] = []

    def span(self, line: int, col: int, length: int) -> Span:
        return Span(self.file, line, col, length)

    def _advance(self, n: int) -> str:
        chunk = self.text[self.pos : self.pos + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return chunk

    def _peek(self, offset: int = 0) -> str:
        i = self.pos + offset
        return self.text[i] if i < len(self.text) else ""

    def run(self) -> tuple[list[Token], list[Diagnostic]]:
        leading = ""
        while True:
            leading += self._skip_trivia()
            if self.pos >= len(self.text):
                self.tokens.append(
                    Token("eof", "", self.span(self.line, self.col, 0), leading=leading)
                )
                return self.tokens, self.diagnostics
            token = self._next_token()
            if token is None:
                # Illegal byte: report once, keep it as trivia so the stream
                # stays lossless, and continue.
                line, col = self.line, self.col
                ch = self._peek()
                self.diagnostics.append(
                    Diagnostic(
                        LEX_ERROR,
                        f"illegal character {ch!r}",
                        self.span(line, col, 1),
                    )
                )
                leading += self._advance(1)
                continue
            self.tokens.append(
                Token(token.kind, token.lexeme, token.span, token.value, leading)
            )
            leading = ""

    def _skip_trivia(self) -> str:
        start = self.pos
        while self.pos < len(self.text):
            ch = self._peek()
            if ch in " \t\r\n":
                self._advance(1)
            elif ch == "#":
                while self.pos < len(self.text) and self._peek() != "\n":
                    self._advance(1)
            else:
                break
        return self.text[start : self.pos]

    def _next_token(self) -> Token | None:
        line, col = self.line, self.col
        ch = self._peek()
        if _is_ident_start(ch):
            start = self.pos
            while self.pos < len(self.text) and _is_ident_char(self._peek()):
                self._advance(1)
            word = self.text[start : self.pos]
            kind = "keyword" if word in KEYWORDS else "ident"
            return Token(kind, word, self.span(line, col, len(word)))
        if _is_digit(ch):
            start = self.pos
            while self.pos < len(self.text) and _is_digit(self._peek()):
                self._advance(1)
            if self._peek() == "." and _is_digit(self._peek(1)):
                self._advance(1)
                while self.pos < len(self.text) and _is_digit(self._peek()):
                    self._advance(1)
            lexeme = self.text[start : self.pos]
            return Token(
                "number", lexeme, self.span(line, col, len(lexeme)), float(lexeme)
            )
        if ch == '"':
            return self._string(line, col)
        two = self.text[self.pos : self.pos + 2]
        if two in TWO_CHAR_PUNCT:
            self._advance(2)
            return Token("punct", two, self.span(line, col, 2))
        if ch in ONE_CHAR_PUNCT:
            self._advance(1)
            return Token("punct", ch, self.span(line, col, 1))
        return None

    def _string(self, line: int, col: int) -> Token:
        start = self.pos
        self._advance(1)  # opening quote
        chars: list[str] = []
        terminated = False
        while self.pos < len(self.text):
            ch = self._peek()
            if ch == "\n":
                break
            if ch == "\\" and self._peek(1) in ('"', "\\"):
                chars.append(self._peek(1))
                self._advance(2)
                continue
            self._advance(1)
            if ch == '"':
                terminated = True
                break
            chars.append(ch)
        lexeme = self.text[start : self.pos]
        if not terminated:
            self.diagnostics.append(
                Diagnostic(
                    LEX_ERROR,
                    "unterminated string literal",
                    self.span(line, col, len(lexeme)),
                )
            )
        return Token(
            "string", lexeme, self.span(line, col, len(lexeme)), "".join(chars)
        )


def tokenize(text: str, file: str = "<spec>") -> tuple[list[Token], list[Diagnostic]]:
    """Tokenize `text`; always returns a stream ending in an eof token."""
    return _Lexer(text, file).run()
