"""Command-line interface: validate, eval and gen over spec files.

stdout carries only the value/verdict contract (two lines per metric) and,
for gen, the written artifact paths; everything else goes to stderr.

Exit codes: 0 success; 1 --fail-on-bias tripped; 2 parse/validation errors
(including an unknown --analysis name); 3 file I/O or CSV structure errors;
4 metric evaluation errors (empty groups, zero denominators, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import codegen
from .diagnostics import Diagnostic
from .errors import DatasetError, EvaluationError, UnknownAnalysis
from .loader import load_spec_file
from .metrics import BIASED, EvaluationReport, evaluate_analysis, format_value
from .model import SpecModel

EXIT_OK = 0
EXIT_BIASED = 1
EXIT_SPEC_ERROR = 2
EXIT_IO_ERROR = 3
EXIT_EVAL_ERROR = 4


def _use_color() -> bool:
    return sys.stderr.isatty() and not os.environ.get("FAIRSPEC_NO_COLOR")


def _emit_error(text: str) -> None:
    if _use_color():
        text = f"\x1b[31m{text}\x1b[0m"
    print(text, file=sys.stderr)


def _emit_diagnostics(diagnostics: list[Diagnostic]) -> None:
    for diagnostic in diagnostics:
        _emit_error(diagnostic.render())


def _load(spec_path: str) -> tuple[SpecModel | None, int]:
    try:
        model, diagnostics = load_spec_file(spec_path)
    except OSError as exc:
        _emit_error(f"cannot read {spec_path}: {exc}")
        return None, EXIT_IO_ERROR
    if model is None:
        _emit_diagnostics(diagnostics)
        return None, EXIT_SPEC_ERROR
    return model, EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    _, code = _load(args.spec)
    return code


def cmd_eval(args: argparse.Namespace) -> int:
    model, code = _load(args.spec)
    if model is None:
        return code

    if args.analysis is not None and model.find_analysis(args.analysis) is None:
        _emit_error(f"analysis {args.analysis!r} is not defined in {args.spec}")
        return EXIT_SPEC_ERROR

    if args.analysis is not None:
        selected = [args.analysis]
    else:
        selected = [analysis.name for _, analysis in model.analysis_pairs()]

    reports: list[EvaluationReport] = []
    had_io_error = False
    for name in selected:
        try:
            reports.extend(evaluate_analysis(model, name))
        except (OSError, DatasetError) as exc:
            _emit_error(f"analysis {name!r}: {exc}")
            had_io_error = True
        except UnknownAnalysis as exc:
            _emit_error(str(exc))
            return EXIT_SPEC_ERROR
        except EvaluationError as exc:
            # Binding-level failure (missing column, type mismatch, ...):
            # no metric of this analysis can be evaluated.
            _emit_error(f"analysis {name!r}: {exc}")
            reports.append(
                EvaluationReport(
                    analysis=name,
                    metric="*",
                    comparator=None,  # type: ignore[arg-type]
                    tolerance=0.0,
                    rows_used=0,
                    rows_skipped=0,
                    warnings=[f"{type(exc).__name__}: {exc}"],
                )
            )

    for report in reports:
        if report.value is not None and report.verdict is not None:
            print(format_value(report.value))
            print(report.verdict)
        else:
            for warning in report.warnings:
                _emit_error(f"{report.analysis}/{report.metric}: {warning}")

    if args.json is not None:
        payload = [r.to_json_dict() for r in reports if r.metric != "*"]
        try:
            with open(args.json, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, indent=2)
                handle.write("\n")
        except OSError as exc:
            _emit_error(f"cannot write {args.json}: {exc}")
            return EXIT_IO_ERROR

    if had_io_error:
        return EXIT_IO_ERROR
    if any(r.verdict is None for r in reports):
        return EXIT_EVAL_ERROR
    if args.fail_on_bias and any(r.verdict == BIASED for r in reports):
        return EXIT_BIASED
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    model, code = _load(args.spec)
    if model is None:
        return code
    try:
        artifacts = codegen.generate(model, args.out)
    except OSError as exc:
        _emit_error(f"cannot write to {args.out}: {exc}")
        return EXIT_IO_ERROR
    for artifact in artifacts:
        print(os.path.join(args.out, artifact.relative_path))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairspec",
        description="Validate, evaluate and compile fairness assessment specs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a spec for errors")
    p_validate.add_argument("spec", help="path to the spec file")
    p_validate.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("eval", help="evaluate the analyses of a spec")
    p_eval.add_argument("spec", help="path to the spec file")
    p_eval.add_argument("--analysis", help="evaluate only this analysis")
    p_eval.add_argument("--json", metavar="PATH", help="write a JSON report")
    p_eval.add_argument(
        "--fail-on-bias",
        action="store_true",
        help="exit with code 1 when any verdict is Biased",
    )
    p_eval.set_defaults(func=cmd_eval)

    p_gen = sub.add_parser("gen", help="generate assessment scripts")
    p_gen.add_argument("spec", help="path to the spec file")
    p_gen.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p_gen.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
