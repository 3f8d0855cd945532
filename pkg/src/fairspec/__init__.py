"""fairspec: declare bias definitions, evaluate fairness metrics, generate
standalone assessment scripts."""

from .dsl import parse_predicate, parse_spec, pretty_spec
from .loader import load_spec_file, load_spec_text
from .metrics import evaluate_analysis, evaluate_spec, verdict
from .validate import validate

__version__ = "0.1.0"

__all__ = [
    "parse_spec",
    "parse_predicate",
    "pretty_spec",
    "validate",
    "load_spec_file",
    "load_spec_text",
    "evaluate_analysis",
    "evaluate_spec",
    "verdict",
    "__version__",
]
