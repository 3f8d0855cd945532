"""Recursive-descent parser for the spec language.

The parser never raises on malformed input: it reports diagnostics with spans
and an expected-token hint, recovers at the next top-level `bias` keyword, and
returns whatever biases parsed cleanly.  A hard nesting cap keeps arbitrary
byte soup from exhausting the interpreter stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..diagnostics import PARSE_ERROR, Diagnostic, Span
from ..model import (
    And,
    BinOp,
    ColRef,
    Cmp,
    Comparator,
    Const,
    Expected,
    FunctionExpr,
    GroupSize,
    Log,
    Not,
    Or,
    PredicateExpr,
    Probability,
    RangeCmp,
    RowBinOp,
    RowConst,
    RowExpr,
    SingleCmp,
    SumOver,
)
from .lexer import SOFT_KEYWORDS, Token, tokenize
from .raw import (
    Ident,
    RawAnalysis,
    RawBias,
    RawDataset,
    RawGroup,
    RawMapping,
    RawMetric,
    RawOutcomeMapping,
    RawSelector,
    RawSpec,
    RawValueMap,
    RawVariable,
    RawVariableMapping,
)

MAX_NESTING = 200

RELOPS = ("==", "!=", "<=", ">=", "<", ">")
CMP_OPS = ("==", "<=", ">=", "<", ">")


class ParseAbort(Exception):
    """Internal signal: a diagnostic was recorded, resynchronize."""


@dataclass
class ParseResult:
    spec: "RawSpec | None"
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.spec is not None and not self.diagnostics


class DslSyntaxError(Exception):
    """Raised by `parse_predicate` for standalone expression parsing."""

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__(diagnostics[0].render() if diagnostics else "syntax error")
        self.diagnostics = diagnostics


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics = diagnostics
        self.depth = 0

    # -- token plumbing ----------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def at_eof(self) -> bool:
        return self.current.kind == "eof"

    def advance(self) -> Token:
        tok = self.current
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, expected: str, span: Span | None = None) -> ParseAbort:
        tok = self.current
        found = "end of input" if tok.kind == "eof" else repr(tok.lexeme)
        self.diagnostics.append(
            Diagnostic(
                PARSE_ERROR,
                f"expected {expected}, found {found}",
                span or tok.span,
            )
        )
        return ParseAbort()

    def expect_punct(self, text: str) -> Token:
        if self.current.is_punct(text):
            return self.advance()
        raise self.error(f"'{text}'")

    def expect_keyword(self, word: str) -> Token:
        if self.current.is_keyword(word):
            return self.advance()
        raise self.error(f"'{word}'")

    def accept_keyword(self, word: str) -> Token | None:
        if self.current.is_keyword(word):
            return self.advance()
        return None

    def accept_soft_keyword(self, word: str) -> Token | None:
        assert word in SOFT_KEYWORDS
        if self.current.kind == "ident" and self.current.lexeme == word:
            return self.advance()
        return None

    def accept_punct(self, text: str) -> Token | None:
        if self.current.is_punct(text):
            return self.advance()
        return None

    def expect_ident(self, what: str = "identifier") -> Ident:
        if self.current.kind == "ident":
            tok = self.advance()
            return Ident(tok.lexeme, tok.span)
        raise self.error(what)

    def expect_string(self, what: str = "string literal") -> tuple[str, Span]:
        if self.current.kind == "string":
            tok = self.advance()
            return str(tok.value), tok.span
        raise self.error(what)

    def expect_number(self, what: str = "number") -> tuple[float, Span]:
        """A numeric literal with optional leading sign."""
        sign = 1.0
        span = self.current.span
        if self.current.is_punct("-") or self.current.is_punct("+"):
            sign = -1.0 if self.current.lexeme == "-" else 1.0
            self.advance()
            if self.current.kind != "number":
                raise self.error(what)
        if self.current.kind != "number":
            raise self.error(what)
        tok = self.advance()
        value = sign * float(tok.value)  # type: ignore[arg-type]
        if not math.isfinite(value):
            self.diagnostics.append(
                Diagnostic(PARSE_ERROR, "number literal out of range", tok.span)
            )
            raise ParseAbort()
        return value, span

    def at_number(self) -> bool:
        if self.current.kind == "number":
            return True
        if self.current.is_punct("-") or self.current.is_punct("+"):
            nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
            return nxt is not None and nxt.kind == "number"
        return False

    def nest(self) -> None:
        self.depth += 1
        if self.depth > MAX_NESTING:
            self.diagnostics.append(
                Diagnostic(PARSE_ERROR, "expression nested too deeply", self.current.span)
            )
            raise ParseAbort()

    def unnest(self) -> None:
        self.depth -= 1

    # -- grammar: spec / bias ----------------------------------------------

    def parse_spec(self, file: str) -> RawSpec | None:
        biases: list[RawBias] = []
        if self.at_eof():
            self.diagnostics.append(
                Diagnostic(PARSE_ERROR, "expected 'bias', found end of input", self.current.span)
            )
            return None
        while not self.at_eof():
            if not self.current.is_keyword("bias"):
                self.diagnostics.append(
                    Diagnostic(
                        PARSE_ERROR,
                        f"expected 'bias', found {self.current.lexeme!r}",
                        self.current.span,
                    )
                )
                self.synchronize()
                continue
            try:
                biases.append(self.parse_bias())
            except ParseAbort:
                self.synchronize()
        if self.diagnostics:
            return None
        return RawSpec(tuple(biases), file)

    def synchronize(self) -> None:
        """Skip forward to the next `bias` keyword (or eof).

        `parse_bias` always consumes at least its anchor token before it can
        abort, so resuming on a current `bias` token cannot loop.
        """
        while not self.at_eof() and not self.current.is_keyword("bias"):
            self.advance()

    def parse_bias(self) -> RawBias:
        anchor = self.expect_keyword("bias")
        name, _ = self.expect_string("bias name string")
        self.expect_punct("{")

        self.expect_keyword("kind")
        self.expect_punct(":")
        if self.current.is_keyword("group") or self.current.is_keyword("individual"):
            kind_tok = self.advance()
            kind = Ident(kind_tok.lexeme, kind_tok.span)
        else:
            raise self.error("'group' or 'individual'")

        self.expect_keyword("domain")
        self.expect_punct(":")
        domain, _ = self.expect_string("domain string")

        sources: tuple[Ident, ...] = ()
        if self.accept_keyword("sources"):
            self.expect_punct(":")
            self.expect_punct("[")
            items = [self.expect_ident("bias source identifier")]
            while self.accept_punct(","):
                items.append(self.expect_ident("bias source identifier"))
            self.expect_punct("]")
            sources = tuple(items)

        variables = [self.parse_variable()]
        while self.current.is_keyword("sensitive"):
            variables.append(self.parse_variable())

        self.expect_keyword("positive")
        self.expect_keyword("outcome")
        outcome = self.expect_ident("outcome identifier")

        groups = (self.parse_group(), self.parse_group())

        analyses = [self.parse_analysis()]
        while self.current.is_keyword("analysis"):
            analyses.append(self.parse_analysis())

        self.expect_punct("}")
        return RawBias(
            name=name,
            kind=kind,
            domain=domain,
            sources=sources,
            variables=tuple(variables),
            outcome=outcome,
            groups=groups,
            analyses=tuple(analyses),
            span=anchor.span,
        )

    def parse_variable(self) -> RawVariable:
        anchor = self.expect_keyword("sensitive")
        self.expect_keyword("variable")
        name = self.expect_ident("variable name")
        self.expect_punct("{")
        self.expect_keyword("values")
        self.expect_punct(":")
        self.expect_punct("[")
        values = [self.expect_ident("value identifier")]
        while self.accept_punct(","):
            values.append(self.expect_ident("value identifier"))
        self.expect_punct("]")
        self.expect_punct("}")
        return RawVariable(name, tuple(values), anchor.span)

    def parse_group(self) -> RawGroup:
        if self.current.is_keyword("privileged") or self.current.is_keyword("unprivileged"):
            role_tok = self.advance()
        else:
            raise self.error("'privileged' or 'unprivileged'")
        self.expect_keyword("group")
        self.expect_punct("{")
        members = []
        while self.current.kind == "ident":
            var = self.expect_ident()
            self.expect_punct("=")
            value = self.expect_ident("value identifier")
            members.append((var, value))
        if not members:
            raise self.error("at least one 'variable = value' pair")
        self.expect_punct("}")
        return RawGroup(role_tok.lexeme, tuple(members), role_tok.span)

    # -- grammar: analysis / dataset ----------------------------------------

    def parse_analysis(self) -> RawAnalysis:
        anchor = self.expect_keyword("analysis")
        name, _ = self.expect_string("analysis name string")
        self.expect_punct("{")
        scope = None
        if self.accept_keyword("scope"):
            self.expect_punct(":")
            scope, _ = self.expect_string("scope string")
        dataset = self.parse_dataset()
        metrics = [self.parse_metric()]
        while self.current.is_keyword("metric"):
            metrics.append(self.parse_metric())
        self.expect_punct("}")
        return RawAnalysis(name, scope, dataset, tuple(metrics), anchor.span)

    def parse_dataset(self) -> RawDataset:
        anchor = self.expect_keyword("dataset")
        self.expect_punct("{")
        self.expect_keyword("path")
        self.expect_punct(":")
        path, _ = self.expect_string("dataset path string")
        prediction = None
        ground_truth = None
        if self.accept_soft_keyword("prediction"):
            self.expect_punct(":")
            prediction = self.expect_ident("prediction column")
        if self.accept_soft_keyword("ground_truth"):
            self.expect_punct(":")
            ground_truth = self.expect_ident("ground-truth column")
        mappings = [self.parse_mapping()]
        while self.current.is_keyword("map"):
            mappings.append(self.parse_mapping())
        self.expect_punct("}")
        return RawDataset(path, prediction, ground_truth, tuple(mappings), anchor.span)

    def parse_mapping(self) -> RawMapping:
        anchor = self.expect_keyword("map")
        if self.accept_keyword("outcome"):
            self.expect_punct("->")
            self.expect_keyword("column")
            column = self.expect_ident("column name")
            self.expect_punct("{")
            self.expect_keyword("positive")
            self.expect_punct("=")
            selector = self.parse_selector()
            self.expect_punct("}")
            return RawOutcomeMapping(column, selector, anchor.span)
        variable = self.expect_ident("sensitive variable name or 'outcome'")
        self.expect_punct("->")
        self.expect_keyword("column")
        column = self.expect_ident("column name")
        self.expect_punct("{")
        value_maps = []
        while self.current.kind == "ident":
            value = self.expect_ident()
            self.expect_punct("=")
            value_maps.append(RawValueMap(value, self.parse_selector()))
        if not value_maps:
            raise self.error("at least one 'value = selector' entry")
        self.expect_punct("}")
        return RawVariableMapping(variable, column, tuple(value_maps), anchor.span)

    def parse_selector(self) -> RawSelector:
        tok = self.current
        if self.accept_keyword("top"):
            fraction, _ = self.expect_number("quantile fraction")
            return RawSelector("top", None, fraction, tok.span)
        if self.accept_keyword("bottom"):
            fraction, _ = self.expect_number("quantile fraction")
            return RawSelector("bottom", None, fraction, tok.span)
        if self.current.kind == "string":
            text, span = self.expect_string()
            return RawSelector("absolute", text, None, span)
        if self.at_number():
            value, span = self.expect_number()
            return RawSelector("absolute", value, None, span)
        raise self.error("selector (number, string, 'top' or 'bottom')")

    # -- grammar: metric ------------------------------------------------------

    def parse_metric(self) -> RawMetric:
        anchor = self.expect_keyword("metric")
        name = self.expect_ident("metric name")
        alpha = None
        body: FunctionExpr | None = None
        if name.text == "generalized_entropy_index" and self.current.is_punct("("):
            self.advance()
            alpha, _ = self.expect_number("alpha parameter")
            self.expect_punct(")")
        if self.accept_punct("="):
            body = self.parse_fexpr()
        self.expect_punct("{")
        self.expect_keyword("require")
        comparator = self.parse_comparator()
        tolerance = 0.0
        tolerance_span = None
        if self.accept_keyword("tolerance"):
            tolerance, tolerance_span = self.expect_number("tolerance value")
        self.expect_punct("}")
        return RawMetric(
            name=name,
            body=body,
            alpha=alpha,
            comparator=comparator,
            tolerance=tolerance,
            tolerance_span=tolerance_span,
            span=anchor.span,
        )

    def parse_comparator(self) -> Comparator:
        if self.accept_keyword("in"):
            self.expect_punct("[")
            lower, _ = self.expect_number("range lower bound")
            self.expect_punct(",")
            upper, _ = self.expect_number("range upper bound")
            self.expect_punct("]")
            return RangeCmp(lower, upper)
        for op in CMP_OPS:
            if self.current.is_punct(op):
                self.advance()
                value, _ = self.expect_number("comparison value")
                return SingleCmp(op, value)
        raise self.error("comparator ('==', '<=', '>=', '<', '>' or 'in')")

    # -- grammar: metric function expressions --------------------------------

    def parse_fexpr(self) -> FunctionExpr:
        self.nest()
        try:
            expr = self.parse_fterm()
            while self.current.is_punct("+") or self.current.is_punct("-"):
                op_tok = self.advance()
                right = self.parse_fterm()
                expr = BinOp(op_tok.lexeme, expr, right, op_tok.span)
            return expr
        finally:
            self.unnest()

    def parse_fterm(self) -> FunctionExpr:
        expr = self.parse_ffact()
        while self.current.is_punct("*") or self.current.is_punct("/"):
            op_tok = self.advance()
            right = self.parse_ffact()
            expr = BinOp(op_tok.lexeme, expr, right, op_tok.span)
        return expr

    def parse_ffact(self) -> FunctionExpr:
        self.nest()
        try:
            if self.at_number():
                value, _ = self.expect_number()
                return Const(value)
            if self.accept_punct("("):
                expr = self.parse_fexpr()
                self.expect_punct(")")
                return expr
            if self.accept_keyword("log"):
                self.expect_punct("(")
                base, base_span = self.expect_number("logarithm base")
                if base <= 0 or base == 1.0:
                    self.diagnostics.append(
                        Diagnostic(
                            PARSE_ERROR,
                            "logarithm base must be positive and not 1",
                            base_span,
                        )
                    )
                    raise ParseAbort()
                self.expect_punct(",")
                arg = self.parse_fexpr()
                self.expect_punct(")")
                return Log(base, arg)
            if self.accept_keyword("group_size"):
                self.expect_punct("(")
                pred = self.parse_predicate()
                self.expect_punct(")")
                return GroupSize(pred)
            if self.accept_keyword("probability"):
                self.expect_punct("(")
                event = self.parse_predicate()
                given = None
                if self.accept_punct("|"):
                    given = self.parse_predicate()
                self.expect_punct(")")
                return Probability(event, given)
            if self.accept_keyword("expected"):
                self.expect_punct("(")
                body = self.parse_rexpr()
                given = None
                if self.accept_punct("|"):
                    given = self.parse_predicate()
                self.expect_punct(")")
                return Expected(body, given)
            if self.accept_keyword("sum"):
                self.expect_punct("(")
                over = self.parse_predicate()
                self.expect_punct(",")
                body = self.parse_rexpr()
                self.expect_punct(")")
                return SumOver(over, body)
            raise self.error("metric expression")
        finally:
            self.unnest()

    # -- grammar: predicates ---------------------------------------------------

    def parse_predicate(self) -> PredicateExpr:
        self.nest()
        try:
            expr = self.parse_pred_and()
            while self.accept_keyword("or"):
                right = self.parse_pred_and()
                expr = Or(expr, right)
            return expr
        finally:
            self.unnest()

    def parse_pred_and(self) -> PredicateExpr:
        expr = self.parse_pred_term()
        while self.accept_keyword("and"):
            right = self.parse_pred_term()
            expr = And(expr, right)
        return expr

    def parse_pred_term(self) -> PredicateExpr:
        self.nest()
        try:
            if self.accept_keyword("not"):
                return Not(self.parse_pred_term())
            if self.accept_punct("("):
                expr = self.parse_predicate()
                self.expect_punct(")")
                return expr
            if self.current.kind == "ident":
                column = self.expect_ident()
                for op in RELOPS:
                    if self.current.is_punct(op):
                        self.advance()
                        literal = self.parse_literal()
                        return Cmp(column.text, op, literal, column.span)
                raise self.error("comparison operator")
            raise self.error("predicate")
        finally:
            self.unnest()

    def parse_literal(self) -> float | str:
        if self.current.kind == "string":
            text, _ = self.expect_string()
            return text
        if self.at_number():
            value, _ = self.expect_number()
            return value
        raise self.error("number or string literal")

    # -- grammar: row expressions ------------------------------------------------

    def parse_rexpr(self) -> RowExpr:
        self.nest()
        try:
            expr = self.parse_rterm()
            while self.current.is_punct("+") or self.current.is_punct("-"):
                op_tok = self.advance()
                right = self.parse_rterm()
                expr = RowBinOp(op_tok.lexeme, expr, right, op_tok.span)
            return expr
        finally:
            self.unnest()

    def parse_rterm(self) -> RowExpr:
        expr = self.parse_rfact()
        while self.current.is_punct("*") or self.current.is_punct("/"):
            op_tok = self.advance()
            right = self.parse_rfact()
            expr = RowBinOp(op_tok.lexeme, expr, right, op_tok.span)
        return expr

    def parse_rfact(self) -> RowExpr:
        self.nest()
        try:
            if self.at_number():
                value, _ = self.expect_number()
                return RowConst(value)
            if self.accept_punct("("):
                expr = self.parse_rexpr()
                self.expect_punct(")")
                return expr
            if self.current.kind == "ident":
                ident = self.expect_ident()
                return ColRef(ident.text, ident.span)
            raise self.error("row expression")
        finally:
            self.unnest()


def parse_spec(text: str, file: str = "<spec>") -> ParseResult:
    """Parse a whole spec; collects diagnostics instead of raising."""
    tokens, diagnostics = tokenize(text, file)
    parser = _Parser(tokens, diagnostics)
    spec = parser.parse_spec(file)
    return ParseResult(spec, parser.diagnostics)


def parse_predicate(text: str, file: str = "<predicate>") -> PredicateExpr:
    """Parse a standalone predicate; raises DslSyntaxError on bad input."""
    tokens, diagnostics = tokenize(text, file)
    parser = _Parser(tokens, diagnostics)
    try:
        pred = parser.parse_predicate()
    except ParseAbort:
        raise DslSyntaxError(parser.diagnostics) from None
    if not parser.at_eof():
        parser.diagnostics.append(
            Diagnostic(
                PARSE_ERROR,
                f"unexpected trailing input {parser.current.lexeme!r}",
                parser.current.span,
            )
        )
    if parser.diagnostics:
        raise DslSyntaxError(parser.diagnostics)
    return pred
