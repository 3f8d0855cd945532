"""Error taxonomy for dataset loading, binding and metric evaluation."""

from __future__ import annotations


class DatasetError(Exception):
    """Structural problem in a CSV file."""


class CsvError(DatasetError):
    def __init__(self, message: str, row: int):
        super().__init__(f"{message} (row {row})")
        self.row = row


class DuplicateColumn(DatasetError):
    pass


class ReservedColumnName(DatasetError):
    pass


class EvaluationError(Exception):
    """Base for everything that can abort one metric evaluation."""


class MissingColumn(EvaluationError):
    pass


class TypeMismatch(EvaluationError):
    pass


class EmptyColumn(EvaluationError):
    pass


class NonNumericColumn(EvaluationError):
    pass


class EmptyCondition(EvaluationError):
    """A conditional probability or expectation over zero rows."""


class DivisionByZero(EvaluationError):
    def __init__(self, subexpression: str):
        super().__init__(f"division by zero in {subexpression}")
        self.subexpression = subexpression


class UndefinedRatio(EvaluationError):
    """Disparate impact with a zero privileged positive rate."""


class MissingLabels(EvaluationError):
    pass


class DegenerateBenefit(EvaluationError):
    """Individual metrics with a zero mean benefit."""


class NonFiniteValue(EvaluationError):
    pass


class UnknownAnalysis(EvaluationError):
    pass
