"""Exception hierarchy.

Validation problems derive from :class:`ValueError` so callers that only
care about bad input can catch that; numerical failures derive from
:class:`NumericalError`.
"""


class QSWError(Exception):
    pass


class ValidationError(QSWError, ValueError):
    pass


class NumericalError(QSWError, ArithmeticError):
    pass


class SamplingBudgetExceeded(QSWError, RuntimeError):
    pass


class CoincidentNodes(ValidationError):
    pass


class NonSymmetricAdjacency(ValidationError):
    pass


class SingularGenerator(NumericalError):
    pass


class NonFiniteResult(NumericalError):
    pass


class TailNotConverged(NumericalError):
    pass


class RealizationError(QSWError):
    """Failure inside one ensemble member; ``index`` is the realization number."""

    def __init__(self, index, cause):
        super().__init__(f"realization {index}: {cause}")
        self.index = index
        self.cause = cause
