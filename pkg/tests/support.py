"""Shared helpers for the primary test suite: paths and model builders."""

from __future__ import annotations

import os

from fairspec import dataset as ds
from fairspec import model as m

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(REPO_ROOT, "fixtures")

BUNDLED_SPECS = [
    "compas.fair",
    "german_biased.fair",
    "german_debiased.fair",
    "resyduo.fair",
    "toy10.fair",
    "tpl.fair",
]


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def make_table(columns, rows) -> ds.Table:
    return ds.Table(tuple(columns), tuple(tuple(row) for row in rows))


def absolute(value) -> m.ValueSelector:
    return m.ValueSelector("absolute", value)


def sex_bias(kind: m.BiasKind = m.BiasKind.GROUP, swap: bool = False) -> m.BiasSpec:
    """A bias over one binary `sex` variable: privileged male (sex=1)."""
    priv = m.SensitiveGroup("privileged", (("sex", "male"),))
    unpriv = m.SensitiveGroup("unprivileged", (("sex", "female"),))
    if swap:
        priv = m.SensitiveGroup("privileged", (("sex", "female"),))
        unpriv = m.SensitiveGroup("unprivileged", (("sex", "male"),))
    return m.BiasSpec(
        name="test_bias",
        kind=kind,
        domain="test",
        sources=(),
        variables=(m.SensitiveVariable("sex", ("female", "male")),),
        positive_outcome="favourable",
        privileged=priv,
        unprivileged=unpriv,
        analyses=(),
    )


def sex_binding(
    prediction: str | None = "yhat", ground_truth: str | None = "y"
) -> m.DatasetBinding:
    outcome_column = prediction if prediction is not None else (ground_truth or "yhat")
    return m.DatasetBinding(
        file_path="<memory>",
        resolved_path="<memory>",
        prediction=prediction,
        ground_truth=ground_truth,
        outcome_column=outcome_column,
        outcome_selector=absolute(1.0),
        variables=(
            m.VariableBinding(
                "sex",
                "sex",
                (("female", absolute(0.0)), ("male", absolute(1.0))),
            ),
        ),
    )


def bind_sex_table(rows, swap: bool = False, kind=m.BiasKind.GROUP) -> ds.BoundTable:
    """Bind (sex, y, yhat) rows with the standard sex bias."""
    table = make_table(("sex", "y", "yhat"), rows)
    return ds.bind(table, sex_bias(kind, swap), sex_binding())


TOY10_ROWS = [
    (1, 1, 1),
    (1, 1, 1),
    (1, 0, 1),
    (1, 0, 0),
    (0, 1, 1),
    (0, 1, 0),
    (0, 1, 1),
    (0, 1, 0),
    (0, 0, 1),
    (0, 0, 0),
]
