"""The runtime library recomputes the frozen fixture values independently."""

import math

import pytest

from genruntime.fairness_metric import (
    DegenerateBenefit,
    EmptyCondition,
    FairnessMetric,
    MissingLabels,
    PredicateSyntaxError,
    UndefinedRatio,
    load_csv,
)

from parity_paths import fixture_path


def toy10_metrics() -> FairnessMetric:
    data = load_csv(fixture_path("toy10.csv"))
    return FairnessMetric(data, {"sex": 0}, {"sex": 1}, "y", "yhat", 1)


def libs10_metrics() -> FairnessMetric:
    data = load_csv(fixture_path("libs10.csv"))
    return FairnessMetric(data, {"frequency": 0}, {"frequency": 1}, None, "ranking", 1)


class TestToy10Values:
    """Same frozen oracle numbers the engine is tested against."""

    def test_statistical_parity_difference(self):
        assert toy10_metrics().statistical_parity_difference() == pytest.approx(
            -0.25, abs=1e-12
        )

    def test_disparate_impact(self):
        assert toy10_metrics().disparate_impact() == pytest.approx(
            2.0 / 3.0, abs=1e-12
        )

    def test_equal_opportunity_difference(self):
        assert toy10_metrics().equal_opportunity_difference() == pytest.approx(
            -0.5, abs=1e-12
        )

    def test_average_odds_difference(self):
        assert toy10_metrics().average_odds_difference() == pytest.approx(
            -0.25, abs=1e-12
        )

    def test_generalized_entropy_index(self):
        assert toy10_metrics().generalized_entropy_index(2.0) == pytest.approx(
            0.2, abs=1e-12
        )

    def test_theil_index(self):
        # b = [1,1,2,1,1,0,1,0,2,1], mu = 1: (2 * 2 ln 2) / 10.
        expected = 0.4 * math.log(2.0)
        assert toy10_metrics().theil_index() == pytest.approx(expected, abs=1e-12)


class TestComposedPrimitives:
    def test_group_size_predicate_string(self):
        metrics = libs10_metrics()
        assert metrics.group_size("frequency == 0 and ranking == 1") == 2
        assert metrics.group_size("ranking == 1") == 5
        assert metrics.group_size("ranking == 99") == 0

    def test_probability_and_conditional(self):
        metrics = toy10_metrics()
        assert metrics.probability("yhat == 1", "sex == 1") == 0.75
        assert metrics.probability("yhat == 1") == 0.6

    def test_probability_empty_condition(self):
        with pytest.raises(EmptyCondition):
            toy10_metrics().probability("yhat == 1", "sex == 2")

    def test_expected_and_sum(self):
        metrics = toy10_metrics()
        assert metrics.expected("yhat", "sex == 1") == 0.75
        assert metrics.expected("2 * yhat", "sex == 1") == 1.5
        assert metrics.sum("sex == 1", "yhat") == 3.0

    def test_derived_indicator_columns_are_queryable(self):
        metrics = toy10_metrics()
        assert metrics.group_size("__unpriv == 1") == 6
        assert metrics.probability("__outcome == 1", "__priv == 1") == 0.75

    def test_predicate_parser_rejects_garbage(self):
        with pytest.raises(PredicateSyntaxError):
            toy10_metrics().group_size("frequency == ")
        with pytest.raises(PredicateSyntaxError):
            toy10_metrics().group_size("a == 1 extra")

    def test_string_literals_in_predicates(self, tmp_path):
        csv = tmp_path / "t.csv"
        csv.write_text('city,score\nRome,1\nMilan,0\n')
        data = load_csv(str(csv))
        metrics = FairnessMetric(
            data, {"city": "Milan"}, {"city": "Rome"}, None, "score", 1
        )
        assert metrics.group_size('city == "Rome"') == 1
        assert metrics.statistical_parity_difference() == -1.0


class TestQuantileSelectors:
    def test_resyduo_views_ratio(self):
        data = load_csv(fixture_path("resyduo_views.csv"))
        metrics = FairnessMetric(
            data,
            {"views": {"bottom": 0.2}},
            {"views": {"top": 0.8}},
            None,
            "recommended",
            1,
        )
        unpriv = metrics.probability("__outcome == 1", "__unpriv == 1")
        priv = metrics.probability("__outcome == 1", "__priv == 1")
        assert unpriv == pytest.approx(0.31, abs=1e-12)
        assert priv == 1.0


class TestErrors:
    def test_missing_labels_for_eod(self):
        metrics = libs10_metrics()  # no ground truth bound
        with pytest.raises(MissingLabels):
            metrics.equal_opportunity_difference()

    def test_undefined_ratio(self, tmp_path):
        csv = tmp_path / "t.csv"
        csv.write_text("sex,p\n1,0\n0,1\n")
        metrics = FairnessMetric(load_csv(str(csv)), {"sex": 0}, {"sex": 1}, None, "p", 1)
        with pytest.raises(UndefinedRatio):
            metrics.disparate_impact()

    def test_degenerate_benefit(self, tmp_path):
        csv = tmp_path / "t.csv"
        csv.write_text("sex,y,p\n1,1,0\n0,1,0\n")
        metrics = FairnessMetric(load_csv(str(csv)), {"sex": 0}, {"sex": 1}, "y", "p", 1)
        with pytest.raises(DegenerateBenefit):
            metrics.generalized_entropy_index(2.0)

    def test_missing_cells_skipped(self, tmp_path):
        csv = tmp_path / "t.csv"
        csv.write_text("sex,p\n1,1\n,1\n0,\n0,0\n")
        metrics = FairnessMetric(load_csv(str(csv)), {"sex": 0}, {"sex": 1}, None, "p", 1)
        assert metrics.rows_skipped == 2
        assert len(metrics.rows) == 2
