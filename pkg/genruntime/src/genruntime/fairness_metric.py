"""Standalone runtime for generated fairness assessment scripts.

Generated scripts import this module from the `runtime` package written next
to them.  Everything is re-implemented on the standard library (no imports
from the generator), so the scripts are self-sufficient and double as an
independent computation path for cross-checking the evaluation engine.
"""

from __future__ import annotations

import csv
import math
import re
from fractions import Fraction


class FairnessMetricError(Exception):
    """Base class for runtime evaluation failures."""


class EmptyCondition(FairnessMetricError):
    pass


class UndefinedRatio(FairnessMetricError):
    pass


class MissingLabels(FairnessMetricError):
    pass


class DegenerateBenefit(FairnessMetricError):
    pass


class DivisionByZero(FairnessMetricError):
    pass


class MissingColumn(FairnessMetricError):
    pass


class TypeMismatch(FairnessMetricError):
    pass


class PredicateSyntaxError(FairnessMetricError):
    pass


_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)\Z")


def _parse_cell(text):
    if text == "":
        return None
    if _NUMBER_RE.match(text):
        return float(text)
    return text


def load_csv(path):
    """Read a CSV file into a list of {column: number|text|None} dicts."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise FairnessMetricError("CSV file has no header row") from None
        rows = []
        for record in reader:
            if len(record) != len(header):
                raise FairnessMetricError("CSV row width does not match header")
            rows.append(
                {name: _parse_cell(cell) for name, cell in zip(header, record)}
            )
    return rows


def _quantile(values, fraction):
    """Nearest-rank quantile on the exact decimal value of `fraction`."""
    exact = Fraction(repr(float(fraction)))
    rank = math.ceil(exact * len(values))
    return sorted(values)[rank - 1]


# ---------------------------------------------------------------------------
# Tiny parsers for predicate and row-expression strings
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>[0-9]+(?:\.[0-9]+)?)"
    r'|(?P<str>"(?:\\.|[^"\\])*")'
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>==|!=|<=|>=|[<>()+\-*/]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            if text[pos:].strip() == "":
                break
            raise PredicateSyntaxError(f"cannot tokenize {text[pos:]!r}")
        pos = match.end()
        if match.lastgroup == "num":
            tokens.append(("num", float(match.group("num"))))
        elif match.lastgroup == "str":
            body = match.group("str")[1:-1]
            tokens.append(("str", body.replace('\\"', '"').replace("\\\\", "\\")))
        elif match.lastgroup == "ident":
            word = match.group("ident")
            if word in ("and", "or", "not"):
                tokens.append(("kw", word))
            else:
                tokens.append(("ident", word))
        else:
            tokens.append(("op", match.group("op")))
    tokens.append(("end", None))
    return tokens


class _ExprParser:
    """Recursive descent over predicate / arithmetic strings."""

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        token = self.tokens[self.pos]
        if token[0] != "end":
            self.pos += 1
        return token

    def expect_op(self, op):
        kind, value = self.next()
        if kind != "op" or value != op:
            raise PredicateSyntaxError(f"expected {op!r}, found {value!r}")

    def done(self):
        if self.peek()[0] != "end":
            raise PredicateSyntaxError(f"trailing input {self.peek()[1]!r}")

    # predicates: or < and < not < comparison
    def predicate(self):
        node = self.pred_and()
        while self.peek() == ("kw", "or"):
            self.next()
            node = ("or", node, self.pred_and())
        return node

    def pred_and(self):
        node = self.pred_term()
        while self.peek() == ("kw", "and"):
            self.next()
            node = ("and", node, self.pred_term())
        return node

    def pred_term(self):
        kind, value = self.peek()
        if (kind, value) == ("kw", "not"):
            self.next()
            return ("not", self.pred_term())
        if (kind, value) == ("op", "("):
            self.next()
            node = self.predicate()
            self.expect_op(")")
            return node
        if kind == "ident":
            self.next()
            op_kind, op = self.next()
            if op_kind != "op" or op not in ("==", "!=", "<", "<=", ">", ">="):
                raise PredicateSyntaxError(f"expected comparison, found {op!r}")
            lit = self.literal()
            return ("cmp", value, op, lit)
        raise PredicateSyntaxError(f"expected predicate, found {value!r}")

    def literal(self):
        kind, value = self.next()
        if kind in ("num", "str"):
            return value
        if kind == "op" and value in ("+", "-"):
            sign = -1.0 if value == "-" else 1.0
            kind2, value2 = self.next()
            if kind2 != "num":
                raise PredicateSyntaxError("expected number after sign")
            return sign * value2
        raise PredicateSyntaxError(f"expected literal, found {value!r}")

    # arithmetic row expressions
    def arith(self):
        node = self.arith_term()
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            node = ("bin", op, node, self.arith_term())
        return node

    def arith_term(self):
        node = self.arith_factor()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            node = ("bin", op, node, self.arith_factor())
        return node

    def arith_factor(self):
        kind, value = self.peek()
        if kind == "num":
            self.next()
            return ("const", value)
        if kind == "op" and value in ("+", "-"):
            self.next()
            sign = -1.0 if value == "-" else 1.0
            kind2, value2 = self.next()
            if kind2 != "num":
                raise PredicateSyntaxError("expected number after sign")
            return ("const", sign * value2)
        if kind == "op" and value == "(":
            self.next()
            node = self.arith()
            self.expect_op(")")
            return node
        if kind == "ident":
            self.next()
            return ("col", value)
        raise PredicateSyntaxError(f"expected expression, found {value!r}")


def parse_predicate(text):
    parser = _ExprParser(text)
    node = parser.predicate()
    parser.done()
    return node


def parse_arith(text):
    parser = _ExprParser(text)
    node = parser.arith()
    parser.done()
    return node


def _compare(cell, op, literal):
    if cell is None:
        return False
    if isinstance(cell, str) != isinstance(literal, str):
        return op == "!="
    if op == "==":
        return cell == literal
    if op == "!=":
        return cell != literal
    if op == "<":
        return cell < literal
    if op == "<=":
        return cell <= literal
    if op == ">":
        return cell > literal
    return cell >= literal


def _eval_predicate(node, row):
    tag = node[0]
    if tag == "cmp":
        _, column, op, literal = node
        if column not in row:
            raise MissingColumn(f"column {column!r} does not exist")
        return _compare(row[column], op, literal)
    if tag == "and":
        return _eval_predicate(node[1], row) and _eval_predicate(node[2], row)
    if tag == "or":
        return _eval_predicate(node[1], row) or _eval_predicate(node[2], row)
    return not _eval_predicate(node[1], row)


def _eval_arith(node, row):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "col":
        name = node[1]
        if name not in row:
            raise MissingColumn(f"column {name!r} does not exist")
        value = row[name]
        if value is None or isinstance(value, str):
            raise TypeMismatch(f"column {name!r} is not numeric here")
        return float(value)
    _, op, left, right = node
    a = _eval_arith(left, row)
    b = _eval_arith(right, row)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0.0:
        raise DivisionByZero("division by zero in row expression")
    return a / b


# ---------------------------------------------------------------------------
# The metric context mirroring the generated-script constructor
# ---------------------------------------------------------------------------


def _selector_mask(rows, column, selector):
    """True/False per row for one selector (literal or {'top'/'bottom': p})."""
    values = [row.get(column) for row in rows]
    if any(column not in row for row in rows):
        raise MissingColumn(f"column {column!r} does not exist")
    if isinstance(selector, dict):
        (kind, fraction), = selector.items()
        present = [v for v in values if v is not None]
        if not present:
            raise EmptyCondition(f"column {column!r} has no values")
        if any(isinstance(v, str) for v in present):
            raise TypeMismatch(f"column {column!r} must be numeric")
        if kind == "top":
            threshold = _quantile(present, fraction)
            return [v is not None and v > threshold for v in values]
        if kind == "bottom":
            threshold = _quantile(present, 1 - Fraction(repr(float(fraction))))
            return [v is not None and v < threshold for v in values]
        raise FairnessMetricError(f"unknown selector kind {kind!r}")
    mask = []
    for v in values:
        if v is None or isinstance(v, str) != isinstance(selector, str):
            mask.append(False)
        else:
            mask.append(v == selector)
    return mask


class FairnessMetric:
    """Metric primitives over a dataset plus its group/outcome context.

    Constructor arguments (in order): the loaded rows, the unprivileged and
    privileged group value maps (column -> literal or quantile selector), the
    ground-truth and predicted label column names (either may be None), and
    the positive outcome (literal or quantile selector).  `indicators`
    optionally materializes extra named 0/1 columns from (column, selector)
    pairs for composed metrics that reference them.
    """

    def __init__(
        self,
        data,
        unprivileged_group,
        privileged_group,
        ground_truth_label_name,
        predicted_label_name,
        positive_outcome,
        indicators=None,
    ):
        self.ground_truth_label_name = ground_truth_label_name
        self.predicted_label_name = predicted_label_name
        outcome_column = (
            predicted_label_name
            if predicted_label_name is not None
            else ground_truth_label_name
        )
        if outcome_column is None:
            raise MissingLabels(
                "a prediction or ground_truth label column is required"
            )

        referenced = [outcome_column]
        if predicted_label_name is not None:
            referenced.append(predicted_label_name)
        if ground_truth_label_name is not None:
            referenced.append(ground_truth_label_name)
        referenced.extend(unprivileged_group)
        referenced.extend(privileged_group)
        for name, (column, _) in (indicators or {}).items():
            referenced.append(column)

        derived = {}
        derived["__outcome"] = _selector_mask(data, outcome_column, positive_outcome)
        if predicted_label_name is not None:
            derived["__pred"] = _selector_mask(
                data, predicted_label_name, positive_outcome
            )
        if ground_truth_label_name is not None:
            derived["__truth"] = _selector_mask(
                data, ground_truth_label_name, positive_outcome
            )
        for role, group in (("__unpriv", unprivileged_group), ("__priv", privileged_group)):
            member_masks = [
                _selector_mask(data, column, selector)
                for column, selector in group.items()
            ]
            derived[role] = [
                all(mask[i] for mask in member_masks) for i in range(len(data))
            ]
        for name, (column, selector) in (indicators or {}).items():
            derived[name] = _selector_mask(data, column, selector)

        unique_refs = list(dict.fromkeys(referenced))
        self.rows = []
        for i, row in enumerate(data):
            if any(row.get(column) is None for column in unique_refs):
                continue
            enriched = dict(row)
            for name, mask in derived.items():
                enriched[name] = 1 if mask[i] else 0
            self.rows.append(enriched)
        self.rows_skipped = len(data) - len(self.rows)

    # -- group helpers ------------------------------------------------------

    def _count(self, flag):
        return sum(1 for row in self.rows if row[flag] == 1)

    def _rate(self, numerator_flags, denominator_flags):
        denom = 0
        hits = 0
        for row in self.rows:
            if all(row[f] == 1 for f in denominator_flags):
                denom += 1
                if all(row[f] == 1 for f in numerator_flags):
                    hits += 1
        if denom == 0:
            raise EmptyCondition("condition matches no rows")
        return hits / denom

    def _positive_rate(self, group_flag):
        return self._rate(["__outcome"], [group_flag])

    def _require_labels(self):
        if self.predicted_label_name is None or self.ground_truth_label_name is None:
            raise MissingLabels(
                "both prediction and ground_truth label columns are required"
            )

    # -- built-in metrics ----------------------------------------------------

    def statistical_parity_difference(self):
        return self._positive_rate("__unpriv") - self._positive_rate("__priv")

    def disparate_impact(self):
        priv = self._positive_rate("__priv")
        if priv == 0.0:
            raise UndefinedRatio("privileged positive rate is 0")
        return self._positive_rate("__unpriv") / priv

    def _tpr(self, group_flag):
        rows = [r for r in self.rows if r[group_flag] == 1 and r["__truth"] == 1]
        if not rows:
            raise EmptyCondition("no positive ground-truth rows in group")
        return sum(1 for r in rows if r["__pred"] == 1) / len(rows)

    def _fpr(self, group_flag):
        rows = [r for r in self.rows if r[group_flag] == 1 and r["__truth"] == 0]
        if not rows:
            raise EmptyCondition("no negative ground-truth rows in group")
        return sum(1 for r in rows if r["__pred"] == 1) / len(rows)

    def equal_opportunity_difference(self):
        self._require_labels()
        return self._tpr("__unpriv") - self._tpr("__priv")

    def average_odds_difference(self):
        self._require_labels()
        tpr_diff = self._tpr("__unpriv") - self._tpr("__priv")
        fpr_diff = self._fpr("__unpriv") - self._fpr("__priv")
        return 0.5 * (fpr_diff + tpr_diff)

    def _benefits(self):
        self._require_labels()
        if not self.rows:
            raise EmptyCondition("table has no usable rows")
        counts = {}
        for row in self.rows:
            b = row["__pred"] - row["__truth"] + 1
            counts[b] = counts.get(b, 0) + 1
        n = len(self.rows)
        mean = sum(value * count for value, count in counts.items()) / n
        if mean == 0.0:
            raise DegenerateBenefit("mean benefit is 0")
        return counts, n, mean

    def generalized_entropy_index(self, alpha=2.0):
        counts, n, mean = self._benefits()
        total = math.fsum(
            count * ((value / mean) ** alpha - 1.0)
            for value, count in sorted(counts.items())
        )
        return total / (n * alpha * (alpha - 1.0))

    def theil_index(self):
        counts, n, mean = self._benefits()
        total = math.fsum(
            count * ((value / mean) * math.log(value / mean))
            for value, count in sorted(counts.items())
            if value > 0
        )
        return total / n

    # -- composed-metric primitives ------------------------------------------

    def group_size(self, predicate):
        node = parse_predicate(predicate)
        return sum(1 for row in self.rows if _eval_predicate(node, row))

    def probability(self, event, given=None):
        event_node = parse_predicate(event)
        if given is None:
            if not self.rows:
                raise EmptyCondition("table has no usable rows")
            hits = sum(1 for row in self.rows if _eval_predicate(event_node, row))
            return hits / len(self.rows)
        given_node = parse_predicate(given)
        denom = 0
        hits = 0
        for row in self.rows:
            if _eval_predicate(given_node, row):
                denom += 1
                if _eval_predicate(event_node, row):
                    hits += 1
        if denom == 0:
            raise EmptyCondition("condition matches no rows")
        return hits / denom

    def expected(self, expression, given=None):
        expr_node = parse_arith(expression)
        if given is None:
            rows = self.rows
        else:
            given_node = parse_predicate(given)
            rows = [row for row in self.rows if _eval_predicate(given_node, row)]
        if not rows:
            raise EmptyCondition("condition matches no rows")
        return math.fsum(_eval_arith(expr_node, row) for row in rows) / len(rows)

    def sum(self, predicate, expression):
        pred_node = parse_predicate(predicate)
        expr_node = parse_arith(expression)
        return math.fsum(
            _eval_arith(expr_node, row)
            for row in self.rows
            if _eval_predicate(pred_node, row)
        )
