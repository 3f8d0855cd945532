"""Dataset engine: CSV loading, binding and the statistical primitives.

Cells are Number (float) or Text; an empty cell is missing (None).  Binding a
table materializes the binary indicator columns the metric engine consumes
and excludes rows with missing cells in any bound column.  Tables and bound
tables are immutable, so any number of evaluations may share them.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import model as m
from .dsl.pretty import pretty_row_expr
from .errors import (
    CsvError,
    DuplicateColumn,
    EmptyColumn,
    EmptyCondition,
    DivisionByZero,
    MissingColumn,
    NonNumericColumn,
    ReservedColumnName,
    TypeMismatch,
)

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)\Z")


def parse_cell(text: str) -> float | str | None:
    """Number when the whole cell is a decimal literal, Text otherwise."""
    if text == "":
        return None
    if _NUMBER_RE.match(text):
        return float(text)
    return text


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple[object, ...], ...]

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise MissingColumn(f"column {name!r} does not exist") from None

    def column_values(self, name: str) -> list[object]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]


def load_table(path: str) -> Table:
    """Load an RFC-4180 style CSV; the first record is the header."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvError("file has no header row", 1) from None
        seen: set[str] = set()
        for name in header:
            if name in seen:
                raise DuplicateColumn(f"duplicate column name {name!r}")
            seen.add(name)
            if name.startswith("__"):
                raise ReservedColumnName(
                    f"column name {name!r} uses the reserved '__' prefix"
                )
        width = len(header)
        rows: list[tuple[object, ...]] = []
        for record_no, record in enumerate(reader, start=2):
            if len(record) != width:
                raise CsvError(
                    f"expected {width} cells, found {len(record)}", record_no
                )
            rows.append(tuple(parse_cell(cell) for cell in record))
    return Table(tuple(header), tuple(rows))


def quantile_threshold(values: Sequence[float], p: float | Fraction) -> float:
    """Nearest-rank quantile: the ⌈p·n⌉-th smallest value (1-based).

    The rank is computed on the exact decimal value of `p` so thresholds do
    not drift across float-representation boundaries (e.g. p=0.8, n=10).
    """
    if not values:
        raise EmptyColumn("cannot take a quantile of an empty column")
    for v in values:
        if isinstance(v, str) or v is None:
            raise NonNumericColumn("quantile requires an all-numeric column")
    fraction = p if isinstance(p, Fraction) else Fraction(repr(float(p)))
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {p}")
    rank = math.ceil(fraction * len(values))
    return sorted(values)[rank - 1]


@dataclass(frozen=True)
class BoundTable:
    """A table plus derived 0/1 indicator columns, with skipped rows removed.

    Derived columns: `__outcome`, `__priv`, `__unpriv`, one
    `__sv_<variable>_<value>` per value selector, and `__pred`/`__truth`
    when the corresponding label column is declared.
    """

    table: Table
    kept_rows: tuple[int, ...]  # indices into table.rows
    derived: dict[str, tuple[int, ...]]  # aligned with kept_rows
    rows_skipped: int

    @property
    def rows_used(self) -> int:
        return len(self.kept_rows)

    def cell(self, position: int, column: str) -> object:
        """Value of `column` at kept-row `position` (derived or source)."""
        if column.startswith("__"):
            try:
                return self.derived[column][position]
            except KeyError:
                raise MissingColumn(f"column {column!r} does not exist") from None
        idx = self.table.column_index(column)
        return self.table.rows[self.kept_rows[position]][idx]


def _selector_matcher(
    table: Table, column: str, selector: m.ValueSelector
) -> "list[bool]":
    """Row mask (over all table rows) for one value selector."""
    values = table.column_values(column)
    if selector.kind == "absolute":
        literal = selector.literal
        mask = []
        for v in values:
            if v is None:
                mask.append(False)
            elif isinstance(v, str) != isinstance(literal, str):
                mask.append(False)
            else:
                mask.append(v == literal)
        return mask
    present = [v for v in values if v is not None]
    for v in present:
        if isinstance(v, str):
            raise TypeMismatch(
                f"relative selector needs a numeric column, {column!r} has text"
            )
    if not present:
        raise EmptyColumn(f"column {column!r} has no values to take a quantile of")
    fraction = Fraction(repr(float(selector.fraction)))
    if selector.kind == "top":
        threshold = quantile_threshold(present, fraction)
        return [v is not None and v > threshold for v in values]
    threshold = quantile_threshold(present, 1 - fraction)
    return [v is not None and v < threshold for v in values]


def bind(table: Table, bias: m.BiasSpec, binding: m.DatasetBinding) -> BoundTable:
    """Materialize the indicator columns for `bias` over `table`.

    Quantile thresholds are computed over the non-missing cells of the whole
    column; rows with a missing cell in any bound column are then excluded
    and counted.
    """
    referenced = [binding.outcome_column]
    if binding.prediction is not None:
        referenced.append(binding.prediction)
    if binding.ground_truth is not None:
        referenced.append(binding.ground_truth)
    for vb in binding.variables:
        referenced.append(vb.column)
    for column in referenced:
        table.column_index(column)  # raises MissingColumn

    masks: dict[str, list[bool]] = {}
    masks[m.OUTCOME_COLUMN] = _selector_matcher(
        table, binding.outcome_column, binding.outcome_selector
    )
    if binding.prediction is not None:
        masks[m.PRED_COLUMN] = _selector_matcher(
            table, binding.prediction, binding.outcome_selector
        )
    if binding.ground_truth is not None:
        masks[m.TRUTH_COLUMN] = _selector_matcher(
            table, binding.ground_truth, binding.outcome_selector
        )
    for vb in binding.variables:
        for value, selector in vb.selectors:
            masks[m.indicator_column(vb.variable, value)] = _selector_matcher(
                table, vb.column, selector
            )

    for role, group in (("priv", bias.privileged), ("unpriv", bias.unprivileged)):
        name = m.PRIV_COLUMN if role == "priv" else m.UNPRIV_COLUMN
        member_masks = [
            masks[m.indicator_column(var, value)] for var, value in group.membership
        ]
        masks[name] = [
            all(mask[i] for mask in member_masks) for i in range(table.row_count)
        ]

    referenced_idx = [table.column_index(c) for c in dict.fromkeys(referenced)]
    kept = [
        i
        for i, row in enumerate(table.rows)
        if all(row[j] is not None for j in referenced_idx)
    ]
    derived = {
        name: tuple(1 if mask[i] else 0 for i in kept) for name, mask in masks.items()
    }
    return BoundTable(
        table=table,
        kept_rows=tuple(kept),
        derived=derived,
        rows_skipped=table.row_count - len(kept),
    )


# --------------------------------------------------------------------------
# Predicate and row-expression evaluation
# --------------------------------------------------------------------------


def _compare(cell: object, op: str, literal: float | str) -> bool:
    if cell is None:
        return False
    if isinstance(cell, str) != isinstance(literal, str):
        return op == "!="
    if op == "==":
        return cell == literal
    if op == "!=":
        return cell != literal
    if op == "<":
        return cell < literal  # type: ignore[operator]
    if op == "<=":
        return cell <= literal  # type: ignore[operator]
    if op == ">":
        return cell > literal  # type: ignore[operator]
    return cell >= literal  # type: ignore[operator]


def eval_predicate(bt: BoundTable, pred: m.PredicateExpr, position: int) -> bool:
    if isinstance(pred, m.Cmp):
        return _compare(bt.cell(position, pred.column), pred.op, pred.literal)
    if isinstance(pred, m.And):
        return eval_predicate(bt, pred.left, position) and eval_predicate(
            bt, pred.right, position
        )
    if isinstance(pred, m.Or):
        return eval_predicate(bt, pred.left, position) or eval_predicate(
            bt, pred.right, position
        )
    return not eval_predicate(bt, pred.operand, position)


def eval_row_expr(bt: BoundTable, expr: m.RowExpr, position: int) -> float:
    if isinstance(expr, m.RowConst):
        return expr.value
    if isinstance(expr, m.ColRef):
        cell = bt.cell(position, expr.name)
        if cell is None:
            raise TypeMismatch(f"column {expr.name!r} has a missing value")
        if isinstance(cell, str):
            raise TypeMismatch(f"column {expr.name!r} holds text, expected a number")
        return float(cell)
    left = eval_row_expr(bt, expr.left, position)
    right = eval_row_expr(bt, expr.right, position)
    if expr.op == "+":
        return left + right
    if expr.op == "-":
        return left - right
    if expr.op == "*":
        return left * right
    if right == 0.0:
        raise DivisionByZero(pretty_row_expr(expr))
    return left / right


def _matching_positions(bt: BoundTable, pred: m.PredicateExpr | None) -> Iterable[int]:
    if pred is None:
        return range(bt.rows_used)
    return (i for i in range(bt.rows_used) if eval_predicate(bt, pred, i))


def group_size(bt: BoundTable, pred: m.PredicateExpr) -> int:
    """Number of non-skipped rows satisfying `pred`."""
    return sum(1 for _ in _matching_positions(bt, pred))


def probability(
    bt: BoundTable, event: m.PredicateExpr, given: m.PredicateExpr | None = None
) -> float:
    """P(event | given); unconditional over all non-skipped rows when
    `given` is absent."""
    if given is None:
        if bt.rows_used == 0:
            raise EmptyCondition("table has no usable rows")
        hits = group_size(bt, event)
        return hits / bt.rows_used
    denom = 0
    hits = 0
    for i in range(bt.rows_used):
        if eval_predicate(bt, given, i):
            denom += 1
            if eval_predicate(bt, event, i):
                hits += 1
    if denom == 0:
        raise EmptyCondition("condition matches no rows")
    return hits / denom


def expected_value(
    bt: BoundTable, body: m.RowExpr, given: m.PredicateExpr | None = None
) -> float:
    """Arithmetic mean of `body` over rows satisfying `given`."""
    positions = list(_matching_positions(bt, given))
    if not positions:
        raise EmptyCondition("condition matches no rows")
    return math.fsum(eval_row_expr(bt, body, i) for i in positions) / len(positions)


def sum_over(bt: BoundTable, over: m.PredicateExpr, body: m.RowExpr) -> float:
    """Sum of `body` over rows satisfying `over` (0.0 for no matches)."""
    return math.fsum(
        eval_row_expr(bt, body, i) for i in _matching_positions(bt, over)
    )
