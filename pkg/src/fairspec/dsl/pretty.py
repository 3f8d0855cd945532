"""Canonical text rendering of raw specs and expression trees.

`pretty_spec(parse(src))` reparses to a structurally identical tree for every
accepted input; the expression printers are also reused for diagnostics and
generated code.
"""

from __future__ import annotations

from decimal import Decimal

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
from .raw import (
    RawAnalysis,
    RawBias,
    RawDataset,
    RawMetric,
    RawOutcomeMapping,
    RawSelector,
    RawSpec,
    RawVariableMapping,
)


def format_number(value: float) -> str:
    """Shortest decimal that reparses to exactly `value` (no exponent form)."""
    text = repr(float(value))
    if "e" in text or "E" in text:
        text = format(Decimal(value), "f")
    return text


def format_string(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _format_literal(value: float | str) -> str:
    if isinstance(value, str):
        return format_string(value)
    return format_number(value)


# Precedence tables; larger binds tighter.
_ARITH_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def pretty_predicate(pred: PredicateExpr) -> str:
    return _pred(pred, 0)


def _pred(pred: PredicateExpr, parent_level: int) -> str:
    # levels: or=1, and=2, not=3, cmp=4
    if isinstance(pred, Or):
        text = f"{_pred(pred.left, 1)} or {_pred(pred.right, 2)}"
        level = 1
    elif isinstance(pred, And):
        text = f"{_pred(pred.left, 2)} and {_pred(pred.right, 3)}"
        level = 2
    elif isinstance(pred, Not):
        text = f"not {_pred(pred.operand, 3)}"
        level = 3
    else:
        return f"{pred.column} {pred.op} {_format_literal(pred.literal)}"
    if level < parent_level:
        return f"({text})"
    return text


def pretty_row_expr(expr: RowExpr) -> str:
    return _rexpr(expr, 0, False)


def _rexpr(expr: RowExpr, parent_prec: int, is_right: bool) -> str:
    if isinstance(expr, ColRef):
        return expr.name
    if isinstance(expr, RowConst):
        return format_number(expr.value)
    prec = _ARITH_PREC[expr.op]
    text = f"{_rexpr(expr.left, prec, False)} {expr.op} {_rexpr(expr.right, prec, True)}"
    if prec < parent_prec or (is_right and prec == parent_prec):
        return f"({text})"
    return text


def pretty_function(expr: FunctionExpr) -> str:
    return _fexpr(expr, 0, False)


def _fexpr(expr: FunctionExpr, parent_prec: int, is_right: bool) -> str:
    if isinstance(expr, Const):
        return format_number(expr.value)
    if isinstance(expr, Log):
        return f"log({format_number(expr.base)}, {_fexpr(expr.arg, 0, False)})"
    if isinstance(expr, GroupSize):
        return f"group_size({pretty_predicate(expr.pred)})"
    if isinstance(expr, Probability):
        if expr.given is None:
            return f"probability({pretty_predicate(expr.event)})"
        return f"probability({pretty_predicate(expr.event)} | {pretty_predicate(expr.given)})"
    if isinstance(expr, Expected):
        if expr.given is None:
            return f"expected({pretty_row_expr(expr.body)})"
        return f"expected({pretty_row_expr(expr.body)} | {pretty_predicate(expr.given)})"
    if isinstance(expr, SumOver):
        return f"sum({pretty_predicate(expr.over)}, {pretty_row_expr(expr.body)})"
    prec = _ARITH_PREC[expr.op]
    text = f"{_fexpr(expr.left, prec, False)} {expr.op} {_fexpr(expr.right, prec, True)}"
    if prec < parent_prec or (is_right and prec == parent_prec):
        return f"({text})"
    return text


def pretty_comparator(cmp: Comparator) -> str:
    if isinstance(cmp, RangeCmp):
        return f"in [{format_number(cmp.lower)}, {format_number(cmp.upper)}]"
    assert isinstance(cmp, SingleCmp)
    return f"{cmp.op} {format_number(cmp.value)}"


def _selector(sel: RawSelector) -> str:
    if sel.kind == "top":
        return f"top {format_number(sel.fraction)}"  # type: ignore[arg-type]
    if sel.kind == "bottom":
        return f"bottom {format_number(sel.fraction)}"  # type: ignore[arg-type]
    assert sel.literal is not None
    return _format_literal(sel.literal)


def _metric(metric: RawMetric, out: list[str], indent: str) -> None:
    head = f"{indent}metric {metric.name.text}"
    if metric.alpha is not None:
        head += f"({format_number(metric.alpha)})"
    if metric.body is not None:
        head += f" = {pretty_function(metric.body)}"
    head += f" {{ require {pretty_comparator(metric.comparator)}"
    if metric.tolerance_span is not None or metric.tolerance != 0.0:
        head += f" tolerance {format_number(metric.tolerance)}"
    head += " }"
    out.append(head)


def _dataset(dataset: RawDataset, out: list[str], indent: str) -> None:
    inner = indent + "  "
    out.append(f"{indent}dataset {{")
    out.append(f"{inner}path: {format_string(dataset.path)}")
    if dataset.prediction is not None:
        out.append(f"{inner}prediction: {dataset.prediction.text}")
    if dataset.ground_truth is not None:
        out.append(f"{inner}ground_truth: {dataset.ground_truth.text}")
    for mapping in dataset.mappings:
        if isinstance(mapping, RawOutcomeMapping):
            out.append(
                f"{inner}map outcome -> column {mapping.column.text} "
                f"{{ positive = {_selector(mapping.selector)} }}"
            )
        else:
            assert isinstance(mapping, RawVariableMapping)
            pairs = " ".join(
                f"{vm.value.text} = {_selector(vm.selector)}" for vm in mapping.value_maps
            )
            out.append(
                f"{inner}map {mapping.variable.text} -> column {mapping.column.text} "
                f"{{ {pairs} }}"
            )
    out.append(f"{indent}}}")


def _analysis(analysis: RawAnalysis, out: list[str], indent: str) -> None:
    inner = indent + "  "
    out.append(f"{indent}analysis {format_string(analysis.name)} {{")
    if analysis.scope is not None:
        out.append(f"{inner}scope: {format_string(analysis.scope)}")
    _dataset(analysis.dataset, out, inner)
    for metric in analysis.metrics:
        _metric(metric, out, inner)
    out.append(f"{indent}}}")


def _bias(bias: RawBias, out: list[str]) -> None:
    out.append(f"bias {format_string(bias.name)} {{")
    out.append(f"  kind: {bias.kind.text}")
    out.append(f"  domain: {format_string(bias.domain)}")
    if bias.sources:
        names = ", ".join(s.text for s in bias.sources)
        out.append(f"  sources: [{names}]")
    for variable in bias.variables:
        values = ", ".join(v.text for v in variable.values)
        out.append(
            f"  sensitive variable {variable.name.text} {{ values: [{values}] }}"
        )
    out.append(f"  positive outcome {bias.outcome.text}")
    for group in bias.groups:
        pairs = " ".join(f"{var.text} = {val.text}" for var, val in group.members)
        out.append(f"  {group.role} group {{ {pairs} }}")
    for analysis in bias.analyses:
        _analysis(analysis, out, "  ")
    out.append("}")


def pretty_spec(spec: RawSpec) -> str:
    out: list[str] = []
    for i, bias in enumerate(spec.biases):
        if i:
            out.append("")
        _bias(bias, out)
    return "\n".join(out) + "\n"
