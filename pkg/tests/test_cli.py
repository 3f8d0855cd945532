"""CLI contract: exit codes, stdout purity, JSON reports."""

import json
import os
import stat

import pytest

from support import fixture_path

VALID = fixture_path("compas.fair")


def write_spec(tmp_path, body: str) -> str:
    path = tmp_path / "spec.fair"
    path.write_text(body)
    return str(path)


THREE_ERRORS = """
bias "broken" {
  kind: group
  domain: "d"
  sensitive variable s { values: [a, b] }
  positive outcome o
  privileged group { s = zzz }
  unprivileged group { s = b }
  analysis "a" {
    dataset {
      path: "x.csv"
      prediction: p
      map s -> column s { a = 0 b = 1 }
      map outcome -> column p { positive = top 7 }
    }
    metric statistical_parity_difference { require == 0 tolerance -0.5 }
  }
}
"""


class TestValidate:
    def test_valid_spec_exit_zero_silent(self, run_cli):
        code, out, err = run_cli("validate", VALID)
        assert code == 0
        assert out == ""
        assert err == ""

    def test_three_errors_all_printed_exit_two(self, run_cli, tmp_path):
        spec = write_spec(tmp_path, THREE_ERRORS)
        code, out, err = run_cli("validate", spec)
        assert code == 2
        assert out == ""
        assert err.count("error[") == 3

    def test_missing_file_exit_three(self, run_cli, tmp_path):
        code, _, err = run_cli("validate", str(tmp_path / "absent.fair"))
        assert code == 3
        assert "absent.fair" in err


class TestEval:
    def test_german_debiased_prints_value_then_verdict(self, run_cli):
        code, out, err = run_cli("eval", fixture_path("german_debiased.fair"))
        assert code == 0
        assert out == "-0.05\nFair\n"
        assert err == ""

    def test_fail_on_bias(self, run_cli):
        code, out, _ = run_cli("eval", VALID, "--fail-on-bias")
        assert code == 1
        assert out == "0.3\nBiased\n"

    def test_without_flag_bias_is_exit_zero(self, run_cli):
        code, _, _ = run_cli("eval", VALID)
        assert code == 0

    def test_unknown_analysis_exit_two(self, run_cli):
        code, out, err = run_cli("eval", VALID, "--analysis", "missing_one")
        assert code == 2
        assert out == ""
        assert "missing_one" in err

    def test_analysis_filter_selects_one(self, run_cli):
        code, out, _ = run_cli(
            "eval", fixture_path("resyduo.fair"), "--analysis", "resyduo_respects"
        )
        assert code == 0
        assert out == "0.28\nBiased\n"

    def test_invalid_spec_exit_two(self, run_cli, tmp_path):
        spec = write_spec(tmp_path, THREE_ERRORS)
        code, out, _ = run_cli("eval", spec)
        assert code == 2
        assert out == ""

    def test_missing_dataset_exit_three(self, run_cli, tmp_path):
        spec = write_spec(
            tmp_path,
            THREE_ERRORS.replace("s = zzz", "s = a")
            .replace("tolerance -0.5", "tolerance 0.5")
            .replace("positive = top 7", "positive = 1"),
        )
        code, _, err = run_cli("eval", spec)
        assert code == 3
        assert "x.csv" in err

    def test_metric_error_exit_four(self, run_cli, tmp_path):
        csv = tmp_path / "d.csv"
        csv.write_text("s,p\n1,1\n1,0\n")  # unprivileged group empty
        spec = write_spec(
            tmp_path,
            """
bias "empty_group" {
  kind: group
  domain: "d"
  sensitive variable s { values: [a, b] }
  positive outcome o
  privileged group { s = b }
  unprivileged group { s = a }
  analysis "a" {
    dataset {
      path: "d.csv"
      prediction: p
      map s -> column s { a = 0 b = 1 }
      map outcome -> column p { positive = 1 }
    }
    metric statistical_parity_difference { require == 0 tolerance 0.2 }
  }
}
""",
        )
        code, out, err = run_cli("eval", spec)
        assert code == 4
        assert out == ""
        assert "EmptyCondition" in err

    def test_json_report_schema(self, run_cli, tmp_path):
        report_path = tmp_path / "report.json"
        code, _, _ = run_cli("eval", fixture_path("toy10.fair"), "--json", str(report_path))
        assert code == 0
        payload = json.loads(report_path.read_text())
        assert len(payload) == 6
        expected_keys = {
            "analysis",
            "metric",
            "value",
            "comparator",
            "threshold",
            "tolerance",
            "verdict",
            "rows_used",
            "rows_skipped",
            "warnings",
        }
        for entry in payload:
            assert set(entry) == expected_keys
        first = payload[0]
        assert first["analysis"] == "toy_group_metrics"
        assert first["metric"] == "statistical_parity_difference"
        assert first["value"] == pytest.approx(-0.25)
        assert first["comparator"] == "=="
        assert first["threshold"] == 0.0
        assert first["tolerance"] == 0.2
        assert first["verdict"] == "Biased"
        assert first["rows_used"] == 10

    def test_stdout_carries_only_values_and_verdicts(self, run_cli):
        code, out, _ = run_cli("eval", fixture_path("resyduo.fair"))
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 4
        for value_line in lines[0::2]:
            float(value_line)  # must parse
        assert set(lines[1::2]) <= {"Fair", "Biased"}


class TestGen:
    def test_two_analyses_two_scripts(self, run_cli, tmp_path):
        out_dir = tmp_path / "out"
        code, out, _ = run_cli("gen", fixture_path("resyduo.fair"), "--out", str(out_dir))
        assert code == 0
        printed = out.splitlines()
        assert str(out_dir / "resyduo_views.gen") in printed
        assert str(out_dir / "resyduo_respects.gen") in printed
        assert (out_dir / "runtime" / "fairness_metric.py").exists()

    def test_invalid_spec_writes_nothing(self, run_cli, tmp_path):
        spec = write_spec(tmp_path, THREE_ERRORS)
        out_dir = tmp_path / "out"
        code, out, _ = run_cli("gen", spec, "--out", str(out_dir))
        assert code == 2
        assert out == ""
        assert not out_dir.exists()

    def test_readonly_outdir_exit_three(self, run_cli, tmp_path):
        if os.geteuid() == 0:
            pytest.skip("running as root; permission bits are not enforced")
        out_dir = tmp_path / "ro"
        out_dir.mkdir()
        out_dir.chmod(stat.S_IRUSR | stat.S_IXUSR)
        code, _, err = run_cli("gen", VALID, "--out", str(out_dir))
        assert code == 3
        assert "cannot write" in err

    def test_outdir_blocked_by_file_exit_three(self, run_cli, tmp_path):
        target = tmp_path / "occupied"
        target.write_text("not a directory")
        code, _, err = run_cli("gen", VALID, "--out", str(target))
        assert code == 3
        assert "cannot write" in err


class TestColor:
    def test_no_ansi_when_not_a_tty(self, run_cli, tmp_path, monkeypatch):
        monkeypatch.delenv("FAIRSPEC_NO_COLOR", raising=False)
        spec = write_spec(tmp_path, THREE_ERRORS)
        _, _, err = run_cli("validate", spec)
        assert "\x1b[" not in err
