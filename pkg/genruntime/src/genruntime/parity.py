"""Parity harness: generated scripts versus the fairspec engine.

For every spec file in a fixture directory the harness runs `fairspec eval
--json`, then `fairspec gen`, executes each generated script, and compares
per-metric values (within 1e-9) and verdict strings (exactly).
"""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field

DEFAULT_TOLERANCE = 1e-9
SCRIPT_SUFFIX = ".gen"


class MissingBinary(Exception):
    """The fairspec CLI is not available on PATH (or via FAIRSPEC_BIN)."""


class FixtureMismatch(Exception):
    """A generated script disagreed with the engine on some metric."""


@dataclass(frozen=True)
class MetricComparison:
    spec: str
    analysis: str
    metric: str
    engine_value: float
    script_value: float
    engine_verdict: str
    script_verdict: str
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def ok(self) -> bool:
        return (
            abs(self.engine_value - self.script_value) <= self.tolerance
            and self.engine_verdict == self.script_verdict
        )

    def describe(self) -> str:
        return (
            f"{self.spec}:{self.analysis}/{self.metric}: "
            f"engine={self.engine_value!r} ({self.engine_verdict}) "
            f"script={self.script_value!r} ({self.script_verdict})"
        )


@dataclass
class ParityReport:
    comparisons: list[MetricComparison] = field(default_factory=list)

    @property
    def failures(self) -> list[MetricComparison]:
        return [c for c in self.comparisons if not c.ok]

    def specs(self) -> list[str]:
        seen: dict[str, bool] = {}
        for c in self.comparisons:
            seen[c.spec] = seen.get(c.spec, True) and c.ok
        return list(seen)

    def spec_passed(self, spec: str) -> bool:
        relevant = [c for c in self.comparisons if c.spec == spec]
        return bool(relevant) and all(c.ok for c in relevant)

    def format(self) -> str:
        lines = []
        for spec in self.specs():
            status = "PASS" if self.spec_passed(spec) else "FAIL"
            lines.append(f"[parity] {spec}: {status}")
        for failure in self.failures:
            lines.append(f"  mismatch: {failure.describe()}")
        return "\n".join(lines)

    def ensure(self) -> "ParityReport":
        """Raise FixtureMismatch if any comparison disagrees."""
        if self.failures:
            raise FixtureMismatch(
                "; ".join(failure.describe() for failure in self.failures)
            )
        return self


def find_cli() -> str:
    """Locate the fairspec binary; FAIRSPEC_BIN overrides PATH lookup."""
    override = os.environ.get("FAIRSPEC_BIN")
    if override:
        if not (os.path.isfile(override) and os.access(override, os.X_OK)):
            raise MissingBinary(f"FAIRSPEC_BIN={override!r} is not executable")
        return override
    found = shutil.which("fairspec")
    if found is None:
        raise MissingBinary("the 'fairspec' binary is not on PATH")
    return found


def _run(argv: list[str], what: str) -> subprocess.CompletedProcess:
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise FixtureMismatch(
            f"{what} failed with exit code {proc.returncode}: {proc.stderr.strip()}"
        )
    return proc


def evaluate_with_cli(cli: str, spec_path: str, work_dir: str) -> list[dict]:
    """`fairspec eval --json`: engine reports in spec order."""
    json_path = os.path.join(work_dir, "engine.json")
    _run([cli, "eval", spec_path, "--json", json_path], f"eval {spec_path}")
    with open(json_path, encoding="utf-8") as handle:
        return json.load(handle)


def generate_with_cli(cli: str, spec_path: str, out_dir: str) -> list[str]:
    """`fairspec gen`: returns the generated script paths in spec order."""
    proc = _run([cli, "gen", spec_path, "--out", out_dir], f"gen {spec_path}")
    return [
        line
        for line in proc.stdout.splitlines()
        if line.endswith(SCRIPT_SUFFIX)
    ]


def run_script(script_path: str) -> list[tuple[float, str]]:
    """Execute one generated script; returns its (value, verdict) pairs."""
    proc = _run([sys.executable, script_path], f"script {script_path}")
    lines = proc.stdout.splitlines()
    if len(lines) % 2 != 0:
        raise FixtureMismatch(
            f"script {script_path} printed an odd number of lines: {lines}"
        )
    pairs = []
    for value_line, verdict_line in zip(lines[0::2], lines[1::2]):
        pairs.append((float(value_line), verdict_line))
    return pairs


def _group_reports(reports: list[dict]) -> list[tuple[str, list[dict]]]:
    grouped: list[tuple[str, list[dict]]] = []
    for report in reports:
        if grouped and grouped[-1][0] == report["analysis"]:
            grouped[-1][1].append(report)
        else:
            grouped.append((report["analysis"], [report]))
    return grouped


def compare_generated_tree(
    spec_name: str,
    reports: list[dict],
    out_dir: str,
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[MetricComparison]:
    """Compare engine reports against the scripts already present in
    `out_dir`; used directly by tests to exercise perturbed runtimes."""
    comparisons: list[MetricComparison] = []
    for analysis, metric_reports in _group_reports(reports):
        script = os.path.join(out_dir, _script_filename(analysis))
        pairs = run_script(script)
        if len(pairs) != len(metric_reports):
            raise FixtureMismatch(
                f"{script} printed {len(pairs)} results for "
                f"{len(metric_reports)} metrics"
            )
        for report, (value, verdict) in zip(metric_reports, pairs):
            comparisons.append(
                MetricComparison(
                    spec=spec_name,
                    analysis=analysis,
                    metric=report["metric"],
                    engine_value=report["value"],
                    script_value=value,
                    engine_verdict=report["verdict"],
                    script_verdict=verdict,
                    tolerance=tolerance,
                )
            )
    return comparisons


def _script_filename(analysis_name: str) -> str:
    import re

    return re.sub(r"[^A-Za-z0-9._-]", "_", analysis_name) + SCRIPT_SUFFIX


def compare_spec(
    spec_path: str,
    work_dir: str,
    cli: str | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[MetricComparison]:
    cli = cli or find_cli()
    out_dir = os.path.join(work_dir, "generated")
    reports = evaluate_with_cli(cli, spec_path, work_dir)
    generate_with_cli(cli, spec_path, out_dir)
    return compare_generated_tree(
        os.path.basename(spec_path), reports, out_dir, tolerance
    )


def parity_harness(
    fixture_dir: str,
    work_dir: str | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ParityReport:
    """Compare every `*.fair` spec in `fixture_dir`; returns the report."""
    cli = find_cli()
    specs = sorted(
        name for name in os.listdir(fixture_dir) if name.endswith(".fair")
    )
    if not specs:
        raise FixtureMismatch(f"no .fair specs found in {fixture_dir}")
    report = ParityReport()
    own_tmp = work_dir is None
    base = work_dir or tempfile.mkdtemp(prefix="fairspec-parity-")
    try:
        for name in specs:
            spec_work = os.path.join(base, os.path.splitext(name)[0])
            os.makedirs(spec_work, exist_ok=True)
            report.comparisons.extend(
                compare_spec(
                    os.path.join(fixture_dir, name), spec_work, cli, tolerance
                )
            )
    finally:
        if own_tmp:
            shutil.rmtree(base, ignore_errors=True)
    return report


def assert_parity(fixture_dir: str, **kwargs) -> ParityReport:
    """Like parity_harness but raises FixtureMismatch on any disagreement."""
    return parity_harness(fixture_dir, **kwargs).ensure()


def main(argv: list[str] | None = None) -> int:
    args = argv if argv is not None else sys.argv[1:]
    if len(args) != 1:
        print("usage: python -m genruntime.parity <fixture-dir>", file=sys.stderr)
        return 2
    try:
        report = parity_harness(args[0])
    except (MissingBinary, FixtureMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.format())
    return 1 if report.failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
