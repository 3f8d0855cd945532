"""Cross-implementation parity: generated scripts versus `fairspec eval`."""

import os

import pytest

import genruntime.fairness_metric
from genruntime.parity import (
    FixtureMismatch,
    MissingBinary,
    ParityReport,
    assert_parity,
    compare_generated_tree,
    compare_spec,
    evaluate_with_cli,
    find_cli,
    generate_with_cli,
    parity_harness,
)

from parity_paths import fixture_path

USE_CASE_SPECS = [
    "compas.fair",
    "german_biased.fair",
    "german_debiased.fair",
    "resyduo.fair",
]


class TestHarness:
    def test_all_bundled_fixtures_pass(self, fixtures_dir, tmp_path):
        report = parity_harness(fixtures_dir, work_dir=str(tmp_path))
        assert not report.failures, report.format()
        for spec in USE_CASE_SPECS:
            assert report.spec_passed(spec), spec
        # The bundled set exceeds the four use cases (tpl, toy10).
        assert len(report.specs()) >= 6
        print(report.format())

    def test_report_has_one_line_per_spec(self, fixtures_dir, tmp_path):
        report = parity_harness(fixtures_dir, work_dir=str(tmp_path))
        lines = report.format().splitlines()
        assert len([l for l in lines if l.startswith("[parity]")]) == len(
            report.specs()
        )
        assert all(l.endswith("PASS") for l in lines if l.startswith("[parity]"))

    def test_values_agree_to_tolerance(self, fixtures_dir, tmp_path):
        comparisons = compare_spec(
            fixture_path("toy10.fair"), str(tmp_path), tolerance=1e-9
        )
        assert len(comparisons) == 6
        for comparison in comparisons:
            assert abs(comparison.engine_value - comparison.script_value) <= 1e-9
            assert comparison.engine_verdict == comparison.script_verdict


class TestSensitivity:
    def test_perturbed_runtime_is_detected(self, tmp_path):
        cli = find_cli()
        spec = fixture_path("compas.fair")
        reports = evaluate_with_cli(cli, spec, str(tmp_path))
        out_dir = os.path.join(str(tmp_path), "generated")
        generate_with_cli(cli, spec, out_dir)
        shim = os.path.join(out_dir, "runtime", "fairness_metric.py")
        with open(shim, "a", encoding="utf-8") as handle:
            handle.write(
                "\n_ORIG_SPD = FairnessMetric.statistical_parity_difference\n"
                "FairnessMetric.statistical_parity_difference = (\n"
                "    lambda self: _ORIG_SPD(self) + 1e-3\n"
                ")\n"
            )
        comparisons = compare_generated_tree("compas.fair", reports, out_dir)
        report = ParityReport(comparisons)
        assert report.failures
        with pytest.raises(FixtureMismatch) as err:
            report.ensure()
        assert "statistical_parity_difference" in str(err.value)

    def test_assert_parity_passes_on_pristine_fixtures(self, fixtures_dir, tmp_path):
        report = assert_parity(fixtures_dir, work_dir=str(tmp_path))
        assert report.comparisons


class TestMissingBinary:
    def test_empty_path_raises(self, monkeypatch):
        monkeypatch.delenv("FAIRSPEC_BIN", raising=False)
        monkeypatch.setenv("PATH", "/nonexistent")
        with pytest.raises(MissingBinary):
            find_cli()

    def test_bad_override_raises(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FAIRSPEC_BIN", str(tmp_path / "absent"))
        with pytest.raises(MissingBinary):
            find_cli()


class TestShimSingleSource:
    def test_emitted_runtime_matches_this_package(self, tmp_path):
        """The shim fairspec emits must be byte-identical to the module this
        package ships (and tests)."""
        cli = find_cli()
        out_dir = str(tmp_path / "gen")
        generate_with_cli(cli, fixture_path("toy10.fair"), out_dir)
        emitted = os.path.join(out_dir, "runtime", "fairness_metric.py")
        with open(emitted, "rb") as handle:
            emitted_bytes = handle.read()
        with open(genruntime.fairness_metric.__file__, "rb") as handle:
            package_bytes = handle.read()
        assert emitted_bytes == package_bytes
