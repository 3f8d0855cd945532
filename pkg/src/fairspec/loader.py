"""Convenience entry point: spec file -> validated model + diagnostics.

Dataset paths inside a spec resolve relative to the spec file's directory,
so invocations are reproducible from any working directory.
"""

from __future__ import annotations

import os

from .diagnostics import Diagnostic
from .dsl import parse_spec
from .model import SpecModel
from .validate import validate


def load_spec_text(
    text: str, file: str = "<spec>", base_dir: str | None = None
) -> tuple[SpecModel | None, list[Diagnostic]]:
    result = parse_spec(text, file)
    if result.spec is None:
        return None, result.diagnostics
    return validate(result.spec, base_dir)


def load_spec_file(path: str) -> tuple[SpecModel | None, list[Diagnostic]]:
    """Parse and validate a spec file; raises OSError on unreadable input."""
    absolute = os.path.abspath(path)
    with open(absolute, encoding="utf-8") as handle:
        text = handle.read()
    return load_spec_text(text, path, os.path.dirname(absolute))
