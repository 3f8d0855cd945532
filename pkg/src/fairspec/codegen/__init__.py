"""Template-free generator: one standalone assessment script per analysis.

The rendered scripts follow a fixed observable contract: a declaration block
(file path, label names, group maps, positive outcome, threshold, tolerance),
one metric computation per declared metric, and exactly two stdout lines per
metric (the value at up to 12 significant digits, then `Biased` or `Fair`).
Rendering is a pure function of the model, so regeneration is byte-identical.
"""

from __future__ import annotations

import enum
import json
import os
import re
from dataclasses import dataclass
from importlib import resources

from .. import model as m
from ..dsl.pretty import pretty_predicate, pretty_row_expr

RUNTIME_DIR = "runtime"
SCRIPT_SUFFIX = ".gen"


class ArtifactKind(enum.Enum):
    ASSESSMENT_SCRIPT = "assessment-script"
    RUNTIME_SHIM = "runtime-shim"


@dataclass(frozen=True)
class GeneratedArtifact:
    relative_path: str
    contents: bytes
    kind: ArtifactKind
    analysis: str | None = None


def _py_string(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _py_value(value: float | str) -> str:
    """Data literal: integral floats print like the CSV cells they match."""
    if isinstance(value, str):
        return _py_string(value)
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _py_float(value: float) -> str:
    return repr(float(value))


def _py_selector(selector: m.ValueSelector) -> str:
    if selector.kind == "absolute":
        assert selector.literal is not None
        return _py_value(selector.literal)
    return f'{{"{selector.kind}": {_py_float(selector.fraction)}}}'  # type: ignore[arg-type]


def _group_map(bias: m.BiasSpec, binding: m.DatasetBinding, group: m.SensitiveGroup) -> str:
    entries = []
    for variable, value in group.membership:
        vb = binding.binding_for(variable)
        entries.append(f"{_py_string(vb.column)}: {_py_selector(vb.selector_for(value))}")
    return "{" + ", ".join(entries) + "}"


def _sv_references(expr: m.FunctionExpr, names: set[str]) -> None:
    """Collect `__sv_*` column names referenced by a composed metric."""

    def from_pred(pred: m.PredicateExpr) -> None:
        if isinstance(pred, m.Cmp):
            if pred.column.startswith("__sv_"):
                names.add(pred.column)
        elif isinstance(pred, m.Not):
            from_pred(pred.operand)
        else:
            from_pred(pred.left)
            from_pred(pred.right)

    def from_row(row: m.RowExpr) -> None:
        if isinstance(row, m.ColRef):
            if row.name.startswith("__sv_"):
                names.add(row.name)
        elif isinstance(row, m.RowBinOp):
            from_row(row.left)
            from_row(row.right)

    if isinstance(expr, m.BinOp):
        _sv_references(expr.left, names)
        _sv_references(expr.right, names)
    elif isinstance(expr, m.Log):
        _sv_references(expr.arg, names)
    elif isinstance(expr, m.GroupSize):
        from_pred(expr.pred)
    elif isinstance(expr, m.Probability):
        from_pred(expr.event)
        if expr.given is not None:
            from_pred(expr.given)
    elif isinstance(expr, m.Expected):
        from_row(expr.body)
        if expr.given is not None:
            from_pred(expr.given)
    elif isinstance(expr, m.SumOver):
        from_pred(expr.over)
        from_row(expr.body)


def _uses_log(expr: m.FunctionExpr) -> bool:
    if isinstance(expr, m.Log):
        return True
    if isinstance(expr, m.BinOp):
        return _uses_log(expr.left) or _uses_log(expr.right)
    return False


def _render_expr(expr: m.FunctionExpr) -> str:
    """Python source for a composed metric over the runtime shim."""
    if isinstance(expr, m.Const):
        return _py_float(expr.value)
    if isinstance(expr, m.BinOp):
        return f"({_render_expr(expr.left)} {expr.op} {_render_expr(expr.right)})"
    if isinstance(expr, m.Log):
        return f"math.log({_render_expr(expr.arg)}, {_py_float(expr.base)})"
    if isinstance(expr, m.GroupSize):
        return f"metrics.group_size({_py_string(pretty_predicate(expr.pred))})"
    if isinstance(expr, m.Probability):
        event = _py_string(pretty_predicate(expr.event))
        if expr.given is None:
            return f"metrics.probability({event})"
        return f"metrics.probability({event}, {_py_string(pretty_predicate(expr.given))})"
    if isinstance(expr, m.Expected):
        body = _py_string(pretty_row_expr(expr.body))
        if expr.given is None:
            return f"metrics.expected({body})"
        return f"metrics.expected({body}, {_py_string(pretty_predicate(expr.given))})"
    assert isinstance(expr, m.SumOver)
    over = _py_string(pretty_predicate(expr.over))
    body = _py_string(pretty_row_expr(expr.body))
    return f"metrics.sum({over}, {body})"


def _metric_value_expr(metric: m.MetricSpec) -> str:
    if metric.builtin == "generalized_entropy_index":
        alpha = metric.alpha if metric.alpha is not None else m.DEFAULT_GEI_ALPHA
        return f"metrics.generalized_entropy_index({_py_float(alpha)})"
    if metric.builtin is not None:
        return f"metrics.{metric.builtin}()"
    assert metric.body is not None
    return _render_expr(metric.body)


def _verdict_block(metric: m.MetricSpec, out: list[str]) -> None:
    cmp = metric.comparator
    if isinstance(cmp, m.RangeCmp):
        out.append(f"threshold_lower = {_py_float(cmp.lower)}")
        out.append(f"threshold_upper = {_py_float(cmp.upper)}")
        out.append(f"tolerance_value = {_py_float(metric.tolerance)}")
        condition = (
            "threshold_lower - tolerance_value <= value "
            "<= threshold_upper + tolerance_value"
        )
    else:
        out.append(f"threshold = {_py_float(cmp.value)}")
        out.append(f"tolerance_value = {_py_float(metric.tolerance)}")
        conditions = {
            "==": "abs(value - threshold) <= tolerance_value",
            "<=": "value <= threshold + tolerance_value",
            ">=": "value >= threshold - tolerance_value",
            "<": "value < threshold + tolerance_value",
            ">": "value > threshold - tolerance_value",
        }
        condition = conditions[cmp.op]
    out.append(f"value = {_metric_value_expr(metric)}")
    out.append('print(f"{value:.12g}")')
    out.append(f"if {condition}:")
    out.append('    print("Fair")')
    out.append("else:")
    out.append('    print("Biased")')


def render_script(bias: m.BiasSpec, analysis: m.AnalysisSpec) -> str:
    """Render the standalone assessment script for one analysis."""
    binding = analysis.dataset
    indicator_names: set[str] = set()
    needs_math = False
    for metric in analysis.metrics:
        if metric.body is not None:
            _sv_references(metric.body, indicator_names)
            needs_math = needs_math or _uses_log(metric.body)

    out: list[str] = []
    out.append("#!/usr/bin/env python3")
    out.append("# Assessment script for analysis "
               f"{analysis.name!r}. Regenerate instead of editing.")
    if needs_math:
        out.append("import math")
    out.append("import os")
    out.append("import sys")
    out.append("")
    out.append("sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))")
    out.append("")
    out.append("from runtime.fairness_metric import FairnessMetric, load_csv")
    out.append("")
    out.append(f"file_path = {_py_string(binding.resolved_path)}")
    pred = binding.prediction
    truth = binding.ground_truth
    out.append(
        f"predicted_label_name = {_py_string(pred) if pred is not None else 'None'}"
    )
    out.append(
        "ground_truth_label_name = "
        f"{_py_string(truth) if truth is not None else 'None'}"
    )
    out.append(
        f"dataset_unprivileged_group = {_group_map(bias, binding, bias.unprivileged)}"
    )
    out.append(
        f"dataset_privileged_group = {_group_map(bias, binding, bias.privileged)}"
    )
    out.append(f"dataset_positive_outcome = {_py_selector(binding.outcome_selector)}")
    if indicator_names:
        entries = []
        for name in sorted(indicator_names):
            vb, value = _indicator_source(bias, binding, name)
            entries.append(
                f"{_py_string(name)}: "
                f"[{_py_string(vb.column)}, {_py_selector(vb.selector_for(value))}]"
            )
        out.append("dataset_indicators = {" + ", ".join(entries) + "}")
    out.append("")
    out.append("data = load_csv(file_path)")
    out.append("metrics = FairnessMetric(data,")
    out.append("    dataset_unprivileged_group,")
    out.append("    dataset_privileged_group,")
    out.append("    ground_truth_label_name,")
    out.append("    predicted_label_name,")
    if indicator_names:
        out.append("    dataset_positive_outcome,")
        out.append("    indicators=dataset_indicators)")
    else:
        out.append("    dataset_positive_outcome)")
    for metric in analysis.metrics:
        out.append("")
        out.append(f"# metric {metric.name}")
        _verdict_block(metric, out)
    return "\n".join(out) + "\n"


def _indicator_source(
    bias: m.BiasSpec, binding: m.DatasetBinding, name: str
) -> tuple[m.VariableBinding, str]:
    for vb in binding.variables:
        for value, _ in vb.selectors:
            if m.indicator_column(vb.variable, value) == name:
                return vb, value
    raise ValueError(f"no indicator source for {name!r}")


def script_filename(analysis_name: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]", "_", analysis_name)
    return safe + SCRIPT_SUFFIX


def _runtime_bytes(resource: str) -> bytes:
    return (resources.files(__package__) / "_runtime" / resource).read_bytes()


def render_artifacts(model: m.SpecModel) -> list[GeneratedArtifact]:
    """All artifacts for `model`: one script per analysis plus the shim."""
    artifacts = [
        GeneratedArtifact(
            relative_path=script_filename(analysis.name),
            contents=render_script(bias, analysis).encode("utf-8"),
            kind=ArtifactKind.ASSESSMENT_SCRIPT,
            analysis=analysis.name,
        )
        for bias, analysis in model.analysis_pairs()
    ]
    for resource in ("__init__.py", "fairness_metric.py"):
        artifacts.append(
            GeneratedArtifact(
                relative_path=os.path.join(RUNTIME_DIR, resource),
                contents=_runtime_bytes(resource),
                kind=ArtifactKind.RUNTIME_SHIM,
            )
        )
    return artifacts


def generate(model: m.SpecModel, out_dir: str) -> list[GeneratedArtifact]:
    """Write all artifacts under `out_dir` (created on demand)."""
    artifacts = render_artifacts(model)
    os.makedirs(os.path.join(out_dir, RUNTIME_DIR), exist_ok=True)
    for artifact in artifacts:
        path = os.path.join(out_dir, artifact.relative_path)
        with open(path, "wb") as handle:
            handle.write(artifact.contents)
    return artifacts
