"""Exception hierarchy shared by all qipf modules.

The CLI maps these onto exit codes: input/contract problems exit with 2,
numerical or training failures exit with 3.
"""


class QipfError(Exception):
    """Base class for all qipf errors."""


class InvalidArgumentError(QipfError):
    """An argument violates a documented precondition."""


class DegenerateDataError(InvalidArgumentError):
    """Input data has no spread where spread is required (e.g. bandwidth 0)."""


class UnsupportedOrderError(InvalidArgumentError):
    """Polynomial order outside the supported range."""


class UndefinedMetricError(InvalidArgumentError):
    """A metric is undefined on this input (single class, zero variance)."""


class FormatError(InvalidArgumentError):
    """A file does not parse against its declared schema."""


class NumericalFailureError(QipfError):
    """A non-finite intermediate appeared during decomposition.

    Carries the evaluation point and mode index that produced it.
    """

    def __init__(self, message: str, *, y: float | None = None, k: int | None = None):
        super().__init__(message)
        self.y = y
        self.k = k


class TrainingFailureError(QipfError):
    """Training diverged; carries the epoch at which the loss became non-finite."""

    def __init__(self, message: str, *, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch
