"""Unresolved syntax tree produced by the parser.

Every node keeps the span of its anchor token; references (variable names,
value names, columns) stay as plain identifiers until validation resolves
them.  Spans are excluded from equality so round-trip comparisons are
formatting-insensitive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..diagnostics import Span
from ..model import Comparator, FunctionExpr


@dataclass(frozen=True)
class Ident:
    text: str
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawSelector:
    kind: str  # absolute | top | bottom
    literal: float | str | None
    fraction: float | None
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawValueMap:
    value: Ident
    selector: RawSelector


@dataclass(frozen=True)
class RawVariableMapping:
    variable: Ident
    column: Ident
    value_maps: tuple[RawValueMap, ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawOutcomeMapping:
    column: Ident
    selector: RawSelector
    span: Span = field(compare=False)


RawMapping = Union[RawVariableMapping, RawOutcomeMapping]


@dataclass(frozen=True)
class RawDataset:
    path: str
    prediction: Ident | None
    ground_truth: Ident | None
    mappings: tuple[RawMapping, ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawMetric:
    name: Ident
    body: FunctionExpr | None  # None means built-in metric name
    alpha: float | None  # optional parameter of generalized_entropy_index
    comparator: Comparator
    tolerance: float
    tolerance_span: Span | None = field(compare=False, default=None)
    span: Span = field(compare=False, default=None)  # type: ignore[assignment]


@dataclass(frozen=True)
class RawAnalysis:
    name: str
    scope: str | None
    dataset: RawDataset
    metrics: tuple[RawMetric, ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawGroup:
    role: str  # privileged | unprivileged
    members: tuple[tuple[Ident, Ident], ...]  # (variable, value)
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawVariable:
    name: Ident
    values: tuple[Ident, ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawBias:
    name: str
    kind: Ident
    domain: str
    sources: tuple[Ident, ...]
    variables: tuple[RawVariable, ...]
    outcome: Ident
    groups: tuple[RawGroup, ...]
    analyses: tuple[RawAnalysis, ...]
    span: Span = field(compare=False)


@dataclass(frozen=True)
class RawSpec:
    biases: tuple[RawBias, ...]
    file: str = field(compare=False, default="<spec>")
