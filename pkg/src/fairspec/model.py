"""In-memory semantic model for bias definitions and fairness analyses.

The model is immutable after validation; evaluations may share one instance
across threads freely.  Expression nodes carry optional source spans that are
excluded from equality so that structural comparisons ignore formatting.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

from .diagnostics import Span


class BiasKind(enum.Enum):
    GROUP = "group"
    INDIVIDUAL = "individual"


@dataclass(frozen=True)
class BiasSource:
    """Origin of a bias; `other` carries the user's identifier verbatim."""

    kind: str  # human_discrimination | wrong_data_sampling | historical_bias | other
    text: str | None = None

    KNOWN = ("human_discrimination", "wrong_data_sampling", "historical_bias")

    @classmethod
    def from_ident(cls, ident: str) -> "BiasSource":
        if ident in cls.KNOWN:
            return cls(ident)
        return cls("other", ident)


# --------------------------------------------------------------------------
# Expression trees (metric bodies, predicates, row expressions)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Cmp:
    """column <relop> literal; the leaf of every predicate."""

    column: str
    op: str  # == != < <= > >=
    literal: float | str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class And:
    left: "PredicateExpr"
    right: "PredicateExpr"


@dataclass(frozen=True)
class Or:
    left: "PredicateExpr"
    right: "PredicateExpr"


@dataclass(frozen=True)
class Not:
    operand: "PredicateExpr"


PredicateExpr = Union[Cmp, And, Or, Not]


@dataclass(frozen=True)
class ColRef:
    name: str
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RowConst:
    value: float


@dataclass(frozen=True)
class RowBinOp:
    op: str  # + - * /
    left: "RowExpr"
    right: "RowExpr"
    span: Span | None = field(default=None, compare=False)


RowExpr = Union[ColRef, RowConst, RowBinOp]


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "FunctionExpr"
    right: "FunctionExpr"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Log:
    base: float
    arg: "FunctionExpr"


@dataclass(frozen=True)
class GroupSize:
    pred: PredicateExpr


@dataclass(frozen=True)
class Probability:
    event: PredicateExpr
    given: PredicateExpr | None = None


@dataclass(frozen=True)
class Expected:
    body: RowExpr
    given: PredicateExpr | None = None


@dataclass(frozen=True)
class SumOver:
    over: PredicateExpr
    body: RowExpr


FunctionExpr = Union[Const, BinOp, Log, GroupSize, Probability, Expected, SumOver]


# --------------------------------------------------------------------------
# Comparators and verdict thresholds
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SingleCmp:
    op: str  # == <= >= < >
    value: float


@dataclass(frozen=True)
class RangeCmp:
    lower: float
    upper: float


Comparator = Union[SingleCmp, RangeCmp]


# --------------------------------------------------------------------------
# Dataset binding
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ValueSelector:
    """Absolute literal match or a quantile-relative cut on a numeric column."""

    kind: str  # absolute | top | bottom
    literal: float | str | None = None
    fraction: float | None = None
    span: Span | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "absolute":
            assert self.literal is not None
        else:
            assert self.kind in ("top", "bottom") and self.fraction is not None


@dataclass(frozen=True)
class VariableBinding:
    variable: str
    column: str
    selectors: tuple[tuple[str, ValueSelector], ...]  # (value name, selector)
    span: Span | None = field(default=None, compare=False)

    def selector_for(self, value: str) -> ValueSelector:
        for name, selector in self.selectors:
            if name == value:
                return selector
        raise KeyError(value)


@dataclass(frozen=True)
class DatasetBinding:
    file_path: str
    resolved_path: str
    prediction: str | None
    ground_truth: str | None
    outcome_column: str
    outcome_selector: ValueSelector
    variables: tuple[VariableBinding, ...]
    other_variables: tuple[str, ...] = ()
    span: Span | None = field(default=None, compare=False)

    def binding_for(self, variable: str) -> VariableBinding:
        for vb in self.variables:
            if vb.variable == variable:
                return vb
        raise KeyError(variable)


# Derived indicator column names materialized by the dataset engine.
OUTCOME_COLUMN = "__outcome"
PRIV_COLUMN = "__priv"
UNPRIV_COLUMN = "__unpriv"
PRED_COLUMN = "__pred"
TRUTH_COLUMN = "__truth"


def indicator_column(variable: str, value: str) -> str:
    return f"__sv_{variable}_{value}"


def derived_columns(bias: "BiasSpec", binding: DatasetBinding) -> list[str]:
    """All derived column names a binding materializes for `bias`."""
    names = [OUTCOME_COLUMN, PRIV_COLUMN, UNPRIV_COLUMN]
    if binding.prediction is not None:
        names.append(PRED_COLUMN)
    if binding.ground_truth is not None:
        names.append(TRUTH_COLUMN)
    for vb in binding.variables:
        for value, _ in vb.selectors:
            names.append(indicator_column(vb.variable, value))
    return names


# --------------------------------------------------------------------------
# Metrics, analyses, biases
# --------------------------------------------------------------------------

BUILTIN_GROUP_METRICS = (
    "statistical_parity_difference",
    "disparate_impact",
    "equal_opportunity_difference",
    "average_odds_difference",
)
BUILTIN_INDIVIDUAL_METRICS = ("generalized_entropy_index", "theil_index")
DEFAULT_GEI_ALPHA = 2.0


@dataclass(frozen=True)
class MetricSpec:
    name: str
    comparator: Comparator
    tolerance: float = 0.0
    builtin: str | None = None
    alpha: float | None = None  # only for generalized_entropy_index
    body: FunctionExpr | None = None
    span: Span | None = field(default=None, compare=False)

    @property
    def is_builtin(self) -> bool:
        return self.builtin is not None


@dataclass(frozen=True)
class AnalysisSpec:
    name: str
    dataset: DatasetBinding
    metrics: tuple[MetricSpec, ...]
    scope: str | None = None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SensitiveVariable:
    name: str
    values: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SensitiveGroup:
    role: str  # privileged | unprivileged
    membership: tuple[tuple[str, str], ...]  # (variable, value)
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BiasSpec:
    name: str
    kind: BiasKind
    domain: str
    sources: tuple[BiasSource, ...]
    variables: tuple[SensitiveVariable, ...]
    positive_outcome: str
    privileged: SensitiveGroup
    unprivileged: SensitiveGroup
    analyses: tuple[AnalysisSpec, ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SpecModel:
    """A fully validated specification: biases plus their analyses."""

    biases: tuple[BiasSpec, ...]
    source_path: str | None = None

    def analysis_pairs(self) -> list[tuple[BiasSpec, AnalysisSpec]]:
        return [(b, a) for b in self.biases for a in b.analyses]

    def find_analysis(self, name: str) -> tuple[BiasSpec, AnalysisSpec] | None:
        for bias, analysis in self.analysis_pairs():
            if analysis.name == name:
                return bias, analysis
        return None
