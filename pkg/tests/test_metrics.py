"""Metric engine: built-ins against a brute-force oracle, composed
expressions, verdict logic, per-analysis evaluation."""

import math

import pytest

from fairspec import dataset as ds
from fairspec import model as m
from fairspec.errors import (
    DegenerateBenefit,
    DivisionByZero,
    EmptyCondition,
    MissingLabels,
    NonFiniteValue,
    UndefinedRatio,
    UnknownAnalysis,
)
from fairspec.loader import load_spec_file
from fairspec.metrics import (
    BIASED,
    FAIR,
    eval_builtin_group,
    eval_builtin_individual,
    eval_function,
    evaluate_analysis,
    verdict,
)

from support import TOY10_ROWS, bind_sex_table, fixture_path


# --------------------------------------------------------------------------
# Independent oracle: plain counting over (sex, y, yhat) triples.  This is
# deliberately written against the raw rows, not the engine's primitives.
# --------------------------------------------------------------------------


def oracle_rates(rows, group_sex):
    member = [r for r in rows if r[0] == group_sex]
    positive = sum(1 for r in member if r[2] == 1)
    tp = sum(1 for r in member if r[1] == 1 and r[2] == 1)
    fp = sum(1 for r in member if r[1] == 0 and r[2] == 1)
    y1 = sum(1 for r in member if r[1] == 1)
    y0 = sum(1 for r in member if r[1] == 0)
    return {
        "selection": positive / len(member),
        "tpr": tp / y1 if y1 else None,
        "fpr": fp / y0 if y0 else None,
    }


def oracle_group_metrics(rows):
    priv = oracle_rates(rows, 1)
    unpriv = oracle_rates(rows, 0)
    return {
        "statistical_parity_difference": unpriv["selection"] - priv["selection"],
        "disparate_impact": unpriv["selection"] / priv["selection"],
        "equal_opportunity_difference": unpriv["tpr"] - priv["tpr"],
        "average_odds_difference": 0.5
        * ((unpriv["fpr"] - priv["fpr"]) + (unpriv["tpr"] - priv["tpr"])),
    }


def oracle_gei(rows, alpha):
    benefits = [r[2] - r[1] + 1 for r in rows]
    mu = sum(benefits) / len(benefits)
    total = sum((b / mu) ** alpha - 1.0 for b in benefits)
    return total / (len(benefits) * alpha * (alpha - 1.0))


def oracle_theil(rows):
    benefits = [r[2] - r[1] + 1 for r in rows]
    mu = sum(benefits) / len(benefits)
    total = sum((b / mu) * math.log(b / mu) for b in benefits if b > 0)
    return total / len(benefits)


class TestBuiltinGroupOnToy10:
    # Frozen values, hand-derived: priv (sex=1) selection 3/4, TPR 1, FPR 1/2;
    # unpriv (sex=0) selection 3/6, TPR 2/4, FPR 1/2.
    EXPECTED = {
        "statistical_parity_difference": -0.25,
        "disparate_impact": 2.0 / 3.0,
        "equal_opportunity_difference": -0.5,
        "average_odds_difference": -0.25,
    }

    @pytest.mark.parametrize("name", sorted(EXPECTED))
    def test_matches_frozen_value_and_oracle(self, name, toy10_bound):
        value = eval_builtin_group(name, toy10_bound)
        assert value == pytest.approx(self.EXPECTED[name], abs=1e-12)
        assert value == pytest.approx(oracle_group_metrics(TOY10_ROWS)[name], abs=1e-12)

    def test_identical_distributions_are_neutral(self):
        rows = [(1, 1, 1), (1, 0, 0), (0, 1, 1), (0, 0, 0)]
        bt = bind_sex_table(rows)
        assert eval_builtin_group("statistical_parity_difference", bt) == 0.0
        assert eval_builtin_group("disparate_impact", bt) == 1.0

    def test_empty_group_raises(self):
        rows = [(1, 1, 1), (1, 0, 0)]
        bt = bind_sex_table(rows)
        with pytest.raises(EmptyCondition):
            eval_builtin_group("statistical_parity_difference", bt)

    def test_no_positive_truth_rows_raises_for_eod(self):
        rows = [(1, 0, 1), (0, 0, 1), (1, 0, 0), (0, 0, 0)]
        bt = bind_sex_table(rows)
        with pytest.raises(EmptyCondition):
            eval_builtin_group("equal_opportunity_difference", bt)

    def test_zero_privileged_rate_raises_for_di(self):
        rows = [(1, 1, 0), (0, 1, 1)]
        bt = bind_sex_table(rows)
        with pytest.raises(UndefinedRatio):
            eval_builtin_group("disparate_impact", bt)

    def test_missing_labels_for_eod(self):
        table = ds.Table(("sex", "yhat"), ((1, 1), (0, 0)))
        import support as conftest

        binding = m.DatasetBinding(
            file_path="<memory>",
            resolved_path="<memory>",
            prediction="yhat",
            ground_truth=None,
            outcome_column="yhat",
            outcome_selector=conftest.absolute(1.0),
            variables=(
                m.VariableBinding(
                    "sex",
                    "sex",
                    (("female", conftest.absolute(0.0)), ("male", conftest.absolute(1.0))),
                ),
            ),
        )
        bt = ds.bind(table, conftest.sex_bias(), binding)
        with pytest.raises(MissingLabels):
            eval_builtin_group("equal_opportunity_difference", bt)


class TestBuiltinIndividual:
    def test_perfect_predictions_zero_gei(self):
        rows = [(1, 1, 1), (1, 0, 0), (0, 1, 1), (0, 0, 0)]
        bt = bind_sex_table(rows)
        assert eval_builtin_individual("generalized_entropy_index", bt, 2.0) == 0.0

    def test_hand_computed_benefit_vector(self):
        # b = [2, 0, 1, 1]: one false positive, one false negative, two hits.
        rows = [(1, 0, 1), (1, 1, 0), (0, 1, 1), (0, 0, 0)]
        bt = bind_sex_table(rows)
        value = eval_builtin_individual("generalized_entropy_index", bt, 2.0)
        assert value == pytest.approx(0.25, abs=1e-15)
        assert value == pytest.approx(oracle_gei(rows, 2.0), abs=1e-15)

    def test_toy10_gei(self, toy10_bound):
        value = eval_builtin_individual("generalized_entropy_index", toy10_bound, 2.0)
        assert value == pytest.approx(0.2, abs=1e-12)
        assert value == pytest.approx(oracle_gei(TOY10_ROWS, 2.0), abs=1e-12)

    def test_toy10_theil(self, toy10_bound):
        value = eval_builtin_individual("theil_index", toy10_bound)
        assert value == pytest.approx(oracle_theil(TOY10_ROWS), abs=1e-12)

    def test_other_alphas_match_oracle(self, toy10_bound):
        for alpha in (0.5, 2.0, 3.0):
            value = eval_builtin_individual(
                "generalized_entropy_index", toy10_bound, alpha
            )
            assert value == pytest.approx(oracle_gei(TOY10_ROWS, alpha), rel=1e-12)

    def test_degenerate_benefit(self):
        # Every prediction misses low: b = 0 everywhere.
        rows = [(1, 1, 0), (0, 1, 0)]
        bt = bind_sex_table(rows)
        with pytest.raises(DegenerateBenefit):
            eval_builtin_individual("generalized_entropy_index", bt, 2.0)


def libs10_tpl_bound():
    model, diagnostics = load_spec_file(fixture_path("tpl.fair"))
    assert model is not None, diagnostics
    bias, analysis = model.find_analysis("tpl_coverage")
    table = ds.load_table(analysis.dataset.resolved_path)
    return ds.bind(table, bias, analysis.dataset), analysis


class TestEvalFunction:
    def test_coverage_on_libs10(self):
        bt, analysis = libs10_tpl_bound()
        value = eval_function(analysis.metrics[0].body, bt)
        assert value == 0.4

    def test_constant_precedence(self, toy10_bound):
        expr = m.BinOp(
            "+", m.Const(3.0), m.BinOp("*", m.Const(4.0), m.Const(2.0))
        )
        assert eval_function(expr, toy10_bound) == 11.0

    def test_zero_numerator(self):
        bt, _ = libs10_tpl_bound()
        expr = m.BinOp(
            "/",
            m.GroupSize(m.Cmp("ranking", "==", 99.0)),
            m.GroupSize(m.Cmp("ranking", "==", 1.0)),
        )
        assert eval_function(expr, bt) == 0.0

    def test_division_by_zero_names_the_subexpression(self):
        bt, _ = libs10_tpl_bound()
        expr = m.BinOp(
            "/",
            m.GroupSize(m.Cmp("ranking", "==", 1.0)),
            m.GroupSize(m.Cmp("ranking", "==", 99.0)),
        )
        with pytest.raises(DivisionByZero) as err:
            eval_function(expr, bt)
        assert "group_size(ranking == 99.0)" in str(err.value)

    def test_log_and_sum(self, toy10_bound):
        expr = m.Log(2.0, m.SumOver(m.Cmp("sex", "==", 1.0), m.RowConst(2.0)))
        assert eval_function(expr, toy10_bound) == 3.0

    def test_log_of_non_positive_value(self, toy10_bound):
        expr = m.Log(2.0, m.Const(0.0))
        with pytest.raises(NonFiniteValue):
            eval_function(expr, toy10_bound)

    def test_empty_condition_propagates(self, toy10_bound):
        expr = m.Probability(m.Cmp("yhat", "==", 1.0), m.Cmp("sex", "==", 5.0))
        with pytest.raises(EmptyCondition):
            eval_function(expr, toy10_bound)


class TestVerdict:
    @pytest.mark.parametrize(
        "value,cmp,tol,expected",
        [
            (0.3, m.SingleCmp("==", 0.0), 0.2, BIASED),
            (-0.25, m.SingleCmp("==", 0.0), 0.2, BIASED),
            (-0.05, m.SingleCmp("==", 0.0), 0.2, FAIR),
            (0.29, m.SingleCmp("==", 1.0), 0.2, BIASED),
            (0.31, m.SingleCmp(">=", 0.8), 0.0, BIASED),
            (0.28, m.SingleCmp(">=", 0.8), 0.0, BIASED),
            (0.0, m.SingleCmp("==", 0.0), 0.0, FAIR),
            (0.2, m.SingleCmp("==", 0.0), 0.2, FAIR),  # boundary inclusive
            (0.8, m.SingleCmp(">=", 0.8), 0.0, FAIR),
            (1.0, m.SingleCmp("<", 1.0), 0.0, BIASED),  # strict stays strict
            (1.0, m.SingleCmp("<", 1.0), 0.1, FAIR),
            (0.5, m.RangeCmp(0.8, 1.2), 0.0, BIASED),
            (0.5, m.RangeCmp(0.75, 1.25), 0.25, FAIR),  # dyadic boundary
            (1.3, m.RangeCmp(0.8, 1.2), 0.1, FAIR),
        ],
    )
    def test_cases(self, value, cmp, tol, expected):
        assert verdict(value, cmp, tol) == expected

    def test_non_finite_value(self):
        with pytest.raises(NonFiniteValue):
            verdict(float("nan"), m.SingleCmp("==", 0.0), 0.0)
        with pytest.raises(NonFiniteValue):
            verdict(float("inf"), m.SingleCmp(">=", 0.8), 0.0)


class TestEvaluateAnalysis:
    def test_compas_fixture_end_to_end(self):
        model, _ = load_spec_file(fixture_path("compas.fair"))
        reports = evaluate_analysis(model, "compas_sp")
        assert len(reports) == 1
        report = reports[0]
        assert report.metric == "statistical_parity_difference"
        assert report.value == pytest.approx(0.3, abs=1e-12)
        assert report.verdict == BIASED
        assert report.rows_used == 44
        assert report.rows_skipped == 0

    def test_unknown_analysis(self):
        model, _ = load_spec_file(fixture_path("compas.fair"))
        with pytest.raises(UnknownAnalysis):
            evaluate_analysis(model, "nope")

    def test_metric_error_isolated_from_siblings(self, tmp_path):
        csv = tmp_path / "d.csv"
        csv.write_text("sex,p\n1,1\n1,0\n0,1\n0,0\n")
        spec = tmp_path / "s.fair"
        spec.write_text(
            """
bias "iso" {
  kind: group
  domain: "d"
  sensitive variable sex { values: [f, m] }
  positive outcome o
  privileged group { sex = m }
  unprivileged group { sex = f }
  analysis "two_metrics" {
    dataset {
      path: "d.csv"
      prediction: p
      map sex -> column sex { f = 0 m = 1 }
      map outcome -> column p { positive = 1 }
    }
    metric statistical_parity_difference { require == 0 tolerance 0.2 }
    metric broken = probability(p == 1 | sex == 9) { require == 0 }
  }
}
"""
        )
        model, diagnostics = load_spec_file(str(spec))
        assert model is not None, diagnostics
        reports = evaluate_analysis(model, "two_metrics")
        assert reports[0].verdict is not None
        assert reports[1].verdict is None
        assert reports[1].value is None
        assert any("EmptyCondition" in w for w in reports[1].warnings)
