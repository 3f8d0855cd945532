"""Metric engine: built-in fairness metrics, composed expressions, verdicts.

Sign convention is unprivileged minus privileged (unpriv/priv for ratios).
Evaluation is a pure function of (SpecModel, BoundTable); one analysis never
aborts its sibling metrics.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from . import dataset as ds
from . import model as m
from .dsl.pretty import pretty_function
from .errors import (
    DegenerateBenefit,
    DivisionByZero,
    EmptyCondition,
    EvaluationError,
    MissingLabels,
    NonFiniteValue,
    UndefinedRatio,
    UnknownAnalysis,
)

FAIR = "Fair"
BIASED = "Biased"

_OUTCOME_POSITIVE = m.Cmp(m.OUTCOME_COLUMN, "==", 1)
_PRIV = m.Cmp(m.PRIV_COLUMN, "==", 1)
_UNPRIV = m.Cmp(m.UNPRIV_COLUMN, "==", 1)


def _positive_rate(bt: ds.BoundTable, group: m.PredicateExpr) -> float:
    return ds.probability(bt, _OUTCOME_POSITIVE, group)


def _require_labels(bt: ds.BoundTable, metric: str) -> None:
    if m.PRED_COLUMN not in bt.derived or m.TRUTH_COLUMN not in bt.derived:
        raise MissingLabels(
            f"{metric} needs both prediction and ground_truth label columns"
        )


def _rate(bt: ds.BoundTable, group: m.PredicateExpr, truth_value: int) -> float:
    """P(pred=1 | truth=truth_value, group): TPR for 1, FPR for 0."""
    condition = m.And(m.Cmp(m.TRUTH_COLUMN, "==", truth_value), group)
    return ds.probability(bt, m.Cmp(m.PRED_COLUMN, "==", 1), condition)


def eval_builtin_group(name: str, bt: ds.BoundTable) -> float:
    """Evaluate one of the built-in group metrics over a bound table."""
    if name == "statistical_parity_difference":
        value = _positive_rate(bt, _UNPRIV) - _positive_rate(bt, _PRIV)
        assert -1.0 <= value <= 1.0
        return value
    if name == "disparate_impact":
        priv_rate = _positive_rate(bt, _PRIV)
        unpriv_rate = _positive_rate(bt, _UNPRIV)
        if priv_rate == 0.0:
            raise UndefinedRatio(
                "disparate impact is undefined: privileged positive rate is 0"
            )
        value = unpriv_rate / priv_rate
        assert value >= 0.0
        return value
    if name == "equal_opportunity_difference":
        _require_labels(bt, name)
        value = _rate(bt, _UNPRIV, 1) - _rate(bt, _PRIV, 1)
        assert -1.0 <= value <= 1.0
        return value
    if name == "average_odds_difference":
        _require_labels(bt, name)
        tpr_diff = _rate(bt, _UNPRIV, 1) - _rate(bt, _PRIV, 1)
        fpr_diff = _rate(bt, _UNPRIV, 0) - _rate(bt, _PRIV, 0)
        value = 0.5 * (fpr_diff + tpr_diff)
        assert -1.0 <= value <= 1.0
        return value
    raise ValueError(f"unknown built-in group metric {name!r}")


def _benefit_counts(bt: ds.BoundTable) -> Counter:
    """Counts of the per-row benefit b = pred - truth + 1 (0, 1 or 2)."""
    pred = bt.derived[m.PRED_COLUMN]
    truth = bt.derived[m.TRUTH_COLUMN]
    return Counter(p - t + 1 for p, t in zip(pred, truth))


def eval_builtin_individual(
    name: str, bt: ds.BoundTable, alpha: float | None = None
) -> float:
    """Evaluate one of the built-in individual metrics over a bound table.

    Aggregation goes through the distinct benefit values, so results are
    exactly invariant under row permutation.
    """
    _require_labels(bt, name)
    counts = _benefit_counts(bt)
    n = sum(counts.values())
    if n == 0:
        raise EmptyCondition("table has no usable rows")
    mean = sum(value * count for value, count in counts.items()) / n
    if mean == 0.0:
        raise DegenerateBenefit("mean benefit is 0; entropy index is undefined")
    if name == "generalized_entropy_index":
        a = m.DEFAULT_GEI_ALPHA if alpha is None else alpha
        total = math.fsum(
            count * ((value / mean) ** a - 1.0)
            for value, count in sorted(counts.items())
        )
        value = total / (n * a * (a - 1.0))
        assert value >= 0.0
        return value
    if name == "theil_index":
        total = math.fsum(
            count * ((value / mean) * math.log(value / mean))
            for value, count in sorted(counts.items())
            if value > 0  # 0·ln0 := 0
        )
        value = total / n
        assert value >= 0.0
        return value
    raise ValueError(f"unknown built-in individual metric {name!r}")


def eval_function(expr: m.FunctionExpr, bt: ds.BoundTable) -> float:
    """Recursively evaluate a composed metric expression."""
    if isinstance(expr, m.Const):
        return expr.value
    if isinstance(expr, m.BinOp):
        left = eval_function(expr.left, bt)
        right = eval_function(expr.right, bt)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0.0:
            raise DivisionByZero(pretty_function(expr.right))
        return left / right
    if isinstance(expr, m.Log):
        arg = eval_function(expr.arg, bt)
        if arg <= 0.0:
            raise NonFiniteValue(
                f"logarithm of a non-positive value in {pretty_function(expr)}"
            )
        return math.log(arg) / math.log(expr.base)
    if isinstance(expr, m.GroupSize):
        return float(ds.group_size(bt, expr.pred))
    if isinstance(expr, m.Probability):
        return ds.probability(bt, expr.event, expr.given)
    if isinstance(expr, m.Expected):
        return ds.expected_value(bt, expr.body, expr.given)
    assert isinstance(expr, m.SumOver)
    return ds.sum_over(bt, expr.over, expr.body)


def verdict(value: float, comparator: m.Comparator, tolerance: float) -> str:
    """Fair iff the comparator condition widened by `tolerance` holds."""
    if not math.isfinite(value):
        raise NonFiniteValue(f"metric value {value} is not finite")
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    if isinstance(comparator, m.RangeCmp):
        fair = comparator.lower - tolerance <= value <= comparator.upper + tolerance
        return FAIR if fair else BIASED
    op, threshold = comparator.op, comparator.value
    if op == "==":
        fair = abs(value - threshold) <= tolerance
    elif op == "<=":
        fair = value <= threshold + tolerance
    elif op == ">=":
        fair = value >= threshold - tolerance
    elif op == "<":
        fair = value < threshold + tolerance
    else:  # >
        fair = value > threshold - tolerance
    return FAIR if fair else BIASED


@dataclass
class EvaluationReport:
    """Result of evaluating one metric of one analysis."""

    analysis: str
    metric: str
    comparator: m.Comparator
    tolerance: float
    rows_used: int
    rows_skipped: int
    value: float | None = None
    verdict: str | None = None
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        if isinstance(self.comparator, m.RangeCmp):
            comparator = "in"
            threshold: object = [self.comparator.lower, self.comparator.upper]
        else:
            comparator = self.comparator.op
            threshold = self.comparator.value
        return {
            "analysis": self.analysis,
            "metric": self.metric,
            "value": self.value,
            "comparator": comparator,
            "threshold": threshold,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "rows_used": self.rows_used,
            "rows_skipped": self.rows_skipped,
            "warnings": list(self.warnings),
        }


def evaluate_metric(
    metric: m.MetricSpec, bt: ds.BoundTable, analysis_name: str
) -> EvaluationReport:
    report = EvaluationReport(
        analysis=analysis_name,
        metric=metric.name,
        comparator=metric.comparator,
        tolerance=metric.tolerance,
        rows_used=bt.rows_used,
        rows_skipped=bt.rows_skipped,
    )
    try:
        if metric.builtin in m.BUILTIN_GROUP_METRICS:
            value = eval_builtin_group(metric.builtin, bt)
        elif metric.builtin in m.BUILTIN_INDIVIDUAL_METRICS:
            value = eval_builtin_individual(metric.builtin, bt, metric.alpha)
        else:
            assert metric.body is not None
            value = eval_function(metric.body, bt)
        report.value = value
        report.verdict = verdict(value, metric.comparator, metric.tolerance)
    except EvaluationError as exc:
        report.warnings.append(f"{type(exc).__name__}: {exc}")
    return report


def evaluate_analysis(model: m.SpecModel, analysis_name: str) -> list[EvaluationReport]:
    """Load and bind the analysis dataset once, then evaluate every metric.

    A metric error becomes a warning on its report; siblings still run.
    Dataset-level problems (I/O, CSV structure, binding) propagate.
    """
    found = model.find_analysis(analysis_name)
    if found is None:
        raise UnknownAnalysis(f"analysis {analysis_name!r} is not defined")
    bias, analysis = found
    table = ds.load_table(analysis.dataset.resolved_path)
    bt = ds.bind(table, bias, analysis.dataset)
    return [evaluate_metric(metric, bt, analysis.name) for metric in analysis.metrics]


def evaluate_spec(
    model: m.SpecModel, analysis_filter: str | None = None
) -> list[EvaluationReport]:
    """Evaluate every analysis (or just `analysis_filter`) in spec order."""
    if analysis_filter is not None:
        return evaluate_analysis(model, analysis_filter)
    reports: list[EvaluationReport] = []
    for _, analysis in model.analysis_pairs():
        reports.extend(evaluate_analysis(model, analysis.name))
    return reports


def format_value(value: float) -> str:
    """Stdout rendering of metric values: up to 12 significant digits."""
    return f"{value:.12g}"
