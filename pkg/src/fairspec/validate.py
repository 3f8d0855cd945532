"""Static validation: resolves a raw syntax tree into an immutable SpecModel.

All violations are collected (no fail-fast) and reported with source spans.
A model is returned only when every invariant holds, so downstream stages
never see unresolved references or missing bindings.
"""

from __future__ import annotations

import os

from . import model as m
from .diagnostics import (
    DUPLICATE_NAME,
    IDENTICAL_GROUPS,
    INVALID_ALPHA,
    INVALID_FRACTION,
    INVALID_GROUPS,
    INVALID_RANGE,
    KIND_MISMATCH,
    MISSING_BINDING,
    MISSING_LABELS,
    NEGATIVE_TOLERANCE,
    OUTCOME_COLUMN,
    UNKNOWN_METRIC,
    UNRESOLVED_REFERENCE,
    Diagnostic,
)
from .dsl import raw


class _Collector:
    def __init__(self) -> None:
        self.diagnostics: list[Diagnostic] = []

    def add(self, code: str, message: str, span) -> None:
        self.diagnostics.append(Diagnostic(code, message, span))


def validate(
    spec: raw.RawSpec, base_dir: str | None = None
) -> tuple[m.SpecModel | None, list[Diagnostic]]:
    """Resolve and check `spec`; dataset paths resolve against `base_dir`."""
    out = _Collector()
    seen_biases: set[str] = set()
    seen_analyses: set[str] = set()
    biases: list[m.BiasSpec] = []
    for raw_bias in spec.biases:
        if raw_bias.name in seen_biases:
            out.add(DUPLICATE_NAME, f"duplicate bias name {raw_bias.name!r}", raw_bias.span)
        seen_biases.add(raw_bias.name)
        biases.append(_validate_bias(raw_bias, base_dir, seen_analyses, out))
    if out.diagnostics:
        return None, out.diagnostics
    source = spec.file if spec.file != "<spec>" else None
    return m.SpecModel(tuple(biases), source), []


def _validate_bias(
    bias: raw.RawBias,
    base_dir: str | None,
    seen_analyses: set[str],
    out: _Collector,
) -> m.BiasSpec:
    kind = m.BiasKind(bias.kind.text)
    sources = tuple(m.BiasSource.from_ident(s.text) for s in bias.sources)

    variables: list[m.SensitiveVariable] = []
    var_values: dict[str, set[str]] = {}
    for var in bias.variables:
        if var.name.text in var_values:
            out.add(
                DUPLICATE_NAME,
                f"duplicate sensitive variable {var.name.text!r}",
                var.name.span,
            )
            continue
        values: list[str] = []
        for value in var.values:
            if value.text in values:
                out.add(
                    DUPLICATE_NAME,
                    f"duplicate value {value.text!r} for variable {var.name.text!r}",
                    value.span,
                )
                continue
            values.append(value.text)
        var_values[var.name.text] = set(values)
        variables.append(m.SensitiveVariable(var.name.text, tuple(values), var.span))

    groups = {"privileged": None, "unprivileged": None}
    for group in bias.groups:
        resolved = _validate_group(group, var_values, out)
        if groups.get(group.role) is not None:
            out.add(
                INVALID_GROUPS,
                f"bias {bias.name!r} declares more than one {group.role} group",
                group.span,
            )
        else:
            groups[group.role] = resolved
    privileged = groups["privileged"]
    unprivileged = groups["unprivileged"]
    if privileged is None or unprivileged is None:
        missing = "privileged" if privileged is None else "unprivileged"
        out.add(
            INVALID_GROUPS,
            f"bias {bias.name!r} is missing the {missing} group",
            bias.span,
        )
        placeholder = m.SensitiveGroup("privileged", (), bias.span)
        privileged = privileged or placeholder
        unprivileged = unprivileged or placeholder
    elif set(privileged.membership) == set(unprivileged.membership):
        out.add(
            IDENTICAL_GROUPS,
            "privileged and unprivileged groups are defined by the same "
            "variable/value pairs",
            unprivileged.span,
        )

    analyses: list[m.AnalysisSpec] = []
    for analysis in bias.analyses:
        if analysis.name in seen_analyses:
            out.add(
                DUPLICATE_NAME,
                f"duplicate analysis name {analysis.name!r}",
                analysis.span,
            )
        seen_analyses.add(analysis.name)
        analyses.append(_validate_analysis(analysis, bias, kind, var_values, base_dir, out))

    return m.BiasSpec(
        name=bias.name,
        kind=kind,
        domain=bias.domain,
        sources=sources,
        variables=tuple(variables),
        positive_outcome=bias.outcome.text,
        privileged=privileged,
        unprivileged=unprivileged,
        analyses=tuple(analyses),
        span=bias.span,
    )


def _validate_group(
    group: raw.RawGroup, var_values: dict[str, set[str]], out: _Collector
) -> m.SensitiveGroup:
    members: list[tuple[str, str]] = []
    seen_vars: set[str] = set()
    for var, value in group.members:
        if var.text not in var_values:
            out.add(
                UNRESOLVED_REFERENCE,
                f"group references undeclared sensitive variable {var.text!r}",
                var.span,
            )
            continue
        if var.text in seen_vars:
            out.add(
                DUPLICATE_NAME,
                f"group assigns variable {var.text!r} more than once",
                var.span,
            )
            continue
        seen_vars.add(var.text)
        if value.text not in var_values[var.text]:
            out.add(
                UNRESOLVED_REFERENCE,
                f"value {value.text!r} is not declared for variable {var.text!r}",
                value.span,
            )
            continue
        members.append((var.text, value.text))
    return m.SensitiveGroup(group.role, tuple(members), group.span)


def _validate_selector(sel: raw.RawSelector, out: _Collector) -> m.ValueSelector:
    if sel.kind in ("top", "bottom"):
        assert sel.fraction is not None
        if not 0.0 < sel.fraction < 1.0:
            out.add(
                INVALID_FRACTION,
                f"quantile fraction must be strictly between 0 and 1, got "
                f"{sel.fraction}",
                sel.span,
            )
        return m.ValueSelector(sel.kind, None, sel.fraction, sel.span)
    assert sel.literal is not None
    return m.ValueSelector("absolute", sel.literal, None, sel.span)


def _validate_analysis(
    analysis: raw.RawAnalysis,
    bias: raw.RawBias,
    kind: m.BiasKind,
    var_values: dict[str, set[str]],
    base_dir: str | None,
    out: _Collector,
) -> m.AnalysisSpec:
    binding = _validate_dataset(analysis.dataset, var_values, base_dir, out)

    metrics: list[m.MetricSpec] = []
    seen_metrics: set[str] = set()
    any_builtin = False
    known_columns = _known_columns(bias, binding)
    for metric in analysis.metrics:
        if metric.name.text in seen_metrics:
            out.add(
                DUPLICATE_NAME,
                f"duplicate metric name {metric.name.text!r} in analysis "
                f"{analysis.name!r}",
                metric.name.span,
            )
        seen_metrics.add(metric.name.text)
        resolved = _validate_metric(metric, kind, known_columns, out)
        if resolved.is_builtin:
            any_builtin = True
        metrics.append(resolved)

    if any_builtin and binding.prediction is None and binding.ground_truth is None:
        out.add(
            MISSING_LABELS,
            "built-in metrics need a prediction or ground_truth label column "
            "declared in the dataset",
            analysis.dataset.span,
        )

    return m.AnalysisSpec(
        name=analysis.name,
        dataset=binding,
        metrics=tuple(metrics),
        scope=analysis.scope,
        span=analysis.span,
    )


def _validate_dataset(
    dataset: raw.RawDataset,
    var_values: dict[str, set[str]],
    base_dir: str | None,
    out: _Collector,
) -> m.DatasetBinding:
    variable_bindings: list[m.VariableBinding] = []
    bound_vars: set[str] = set()
    outcome: raw.RawOutcomeMapping | None = None

    for mapping in dataset.mappings:
        if isinstance(mapping, raw.RawOutcomeMapping):
            if outcome is not None:
                out.add(
                    DUPLICATE_NAME,
                    "dataset declares more than one outcome mapping",
                    mapping.span,
                )
                continue
            outcome = mapping
            continue
        name = mapping.variable.text
        if name not in var_values:
            out.add(
                UNRESOLVED_REFERENCE,
                f"mapping references undeclared sensitive variable {name!r}",
                mapping.variable.span,
            )
            continue
        if name in bound_vars:
            out.add(
                DUPLICATE_NAME,
                f"sensitive variable {name!r} is mapped more than once",
                mapping.variable.span,
            )
            continue
        bound_vars.add(name)
        selectors: list[tuple[str, m.ValueSelector]] = []
        seen_values: set[str] = set()
        for vm in mapping.value_maps:
            if vm.value.text not in var_values[name]:
                out.add(
                    UNRESOLVED_REFERENCE,
                    f"value {vm.value.text!r} is not declared for variable {name!r}",
                    vm.value.span,
                )
                continue
            if vm.value.text in seen_values:
                out.add(
                    DUPLICATE_NAME,
                    f"value {vm.value.text!r} has more than one selector",
                    vm.value.span,
                )
                continue
            seen_values.add(vm.value.text)
            selectors.append((vm.value.text, _validate_selector(vm.selector, out)))
        for missing in sorted(var_values[name] - seen_values):
            out.add(
                MISSING_BINDING,
                f"value {missing!r} of variable {name!r} has no selector",
                mapping.span,
            )
        variable_bindings.append(
            m.VariableBinding(name, mapping.column.text, tuple(selectors), mapping.span)
        )

    for missing in sorted(set(var_values) - bound_vars):
        out.add(
            MISSING_BINDING,
            f"sensitive variable {missing!r} has no dataset mapping",
            dataset.span,
        )

    prediction = dataset.prediction.text if dataset.prediction else None
    ground_truth = dataset.ground_truth.text if dataset.ground_truth else None

    if outcome is None:
        out.add(
            MISSING_BINDING,
            "dataset declares no outcome mapping",
            dataset.span,
        )
        outcome_column = prediction or ground_truth or ""
        outcome_selector = m.ValueSelector("absolute", 1.0, None, dataset.span)
    else:
        outcome_column = outcome.column.text
        outcome_selector = _validate_selector(outcome.selector, out)
        expected = prediction if prediction is not None else ground_truth
        if expected is not None and outcome_column != expected:
            label = "prediction" if prediction is not None else "ground_truth"
            out.add(
                OUTCOME_COLUMN,
                f"outcome mapping targets column {outcome_column!r} but the "
                f"{label} label column is {expected!r}",
                outcome.column.span,
            )

    resolved_path = dataset.path
    if base_dir is not None and not os.path.isabs(resolved_path):
        resolved_path = os.path.join(base_dir, resolved_path)

    return m.DatasetBinding(
        file_path=dataset.path,
        resolved_path=resolved_path,
        prediction=prediction,
        ground_truth=ground_truth,
        outcome_column=outcome_column,
        outcome_selector=outcome_selector,
        variables=tuple(variable_bindings),
        span=dataset.span,
    )


def _known_columns(bias: raw.RawBias, binding: m.DatasetBinding) -> set[str]:
    known = {binding.outcome_column, m.OUTCOME_COLUMN, m.PRIV_COLUMN, m.UNPRIV_COLUMN}
    if binding.prediction is not None:
        known.update((binding.prediction, m.PRED_COLUMN))
    if binding.ground_truth is not None:
        known.update((binding.ground_truth, m.TRUTH_COLUMN))
    known.update(binding.other_variables)
    for vb in binding.variables:
        known.add(vb.column)
        for value, _ in vb.selectors:
            known.add(m.indicator_column(vb.variable, value))
    known.discard("")
    return known


def _validate_metric(
    metric: raw.RawMetric,
    kind: m.BiasKind,
    known_columns: set[str],
    out: _Collector,
) -> m.MetricSpec:
    if metric.tolerance < 0:
        out.add(
            NEGATIVE_TOLERANCE,
            f"tolerance must be non-negative, got {metric.tolerance}",
            metric.tolerance_span or metric.span,
        )
    comparator = metric.comparator
    if isinstance(comparator, m.RangeCmp) and comparator.lower > comparator.upper:
        out.add(
            INVALID_RANGE,
            f"range lower bound {comparator.lower} exceeds upper bound "
            f"{comparator.upper}",
            metric.span,
        )

    builtin: str | None = None
    alpha: float | None = None
    if metric.body is None:
        name = metric.name.text
        if name in m.BUILTIN_GROUP_METRICS:
            builtin = name
            if kind is m.BiasKind.INDIVIDUAL:
                out.add(
                    KIND_MISMATCH,
                    f"group metric {name!r} is not allowed in an individual bias",
                    metric.name.span,
                )
        elif name in m.BUILTIN_INDIVIDUAL_METRICS:
            builtin = name
            if kind is m.BiasKind.GROUP:
                out.add(
                    KIND_MISMATCH,
                    f"individual metric {name!r} is not allowed in a group bias",
                    metric.name.span,
                )
            if name == "generalized_entropy_index":
                alpha = metric.alpha if metric.alpha is not None else m.DEFAULT_GEI_ALPHA
                if alpha in (0.0, 1.0):
                    out.add(
                        INVALID_ALPHA,
                        "generalized_entropy_index alpha must not be 0 or 1 "
                        "(use theil_index for the alpha=1 limit)",
                        metric.name.span,
                    )
        else:
            out.add(
                UNKNOWN_METRIC,
                f"{name!r} is not a built-in metric and declares no expression",
                metric.name.span,
            )
    else:
        _check_function_columns(metric.body, known_columns, out)

    return m.MetricSpec(
        name=metric.name.text,
        comparator=comparator,
        tolerance=metric.tolerance,
        builtin=builtin,
        alpha=alpha,
        body=metric.body,
        span=metric.span,
    )


def _check_function_columns(
    expr: m.FunctionExpr, known: set[str], out: _Collector
) -> None:
    if isinstance(expr, m.Const):
        return
    if isinstance(expr, m.BinOp):
        _check_function_columns(expr.left, known, out)
        _check_function_columns(expr.right, known, out)
    elif isinstance(expr, m.Log):
        _check_function_columns(expr.arg, known, out)
    elif isinstance(expr, m.GroupSize):
        _check_predicate_columns(expr.pred, known, out)
    elif isinstance(expr, m.Probability):
        _check_predicate_columns(expr.event, known, out)
        if expr.given is not None:
            _check_predicate_columns(expr.given, known, out)
    elif isinstance(expr, m.Expected):
        _check_row_columns(expr.body, known, out)
        if expr.given is not None:
            _check_predicate_columns(expr.given, known, out)
    elif isinstance(expr, m.SumOver):
        _check_predicate_columns(expr.over, known, out)
        _check_row_columns(expr.body, known, out)


def _check_predicate_columns(
    pred: m.PredicateExpr, known: set[str], out: _Collector
) -> None:
    if isinstance(pred, m.Cmp):
        if pred.column not in known:
            out.add(
                UNRESOLVED_REFERENCE,
                f"column {pred.column!r} is not bound by the dataset mapping",
                pred.span,
            )
    elif isinstance(pred, m.Not):
        _check_predicate_columns(pred.operand, known, out)
    else:
        _check_predicate_columns(pred.left, known, out)
        _check_predicate_columns(pred.right, known, out)


def _check_row_columns(expr: m.RowExpr, known: set[str], out: _Collector) -> None:
    if isinstance(expr, m.ColRef):
        if expr.name not in known:
            out.add(
                UNRESOLVED_REFERENCE,
                f"column {expr.name!r} is not bound by the dataset mapping",
                expr.span,
            )
    elif isinstance(expr, m.RowBinOp):
        _check_row_columns(expr.left, known, out)
        _check_row_columns(expr.right, known, out)
