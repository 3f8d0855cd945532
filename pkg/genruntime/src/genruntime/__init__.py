"""Runtime library for generated assessment scripts and the parity harness.

`fairness_metric` is the module the generator copies next to every script
tree; `parity` drives the fairspec CLI and the generated scripts over the
bundled fixtures and compares their outputs.
"""

from .fairness_metric import FairnessMetric, load_csv
from .parity import FixtureMismatch, MissingBinary, parity_harness

__all__ = [
    "FairnessMetric",
    "load_csv",
    "parity_harness",
    "FixtureMismatch",
    "MissingBinary",
]
