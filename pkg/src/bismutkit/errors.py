"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: :class:`InputError` and its subclasses
give status 2, :class:`NumericalAbort` gives status 3.
"""


class BismutkitError(Exception):
    """Base class for all errors raised by this package."""


class InputError(BismutkitError, ValueError):
    """Malformed or invariant-violating input data."""


class ChartMismatchError(InputError):
    """Two objects that must share a chart do not."""

    def __init__(self, what: str, left, right):
        self.left = left
        self.right = right
        super().__init__(f"{what}: chart {left!r} does not match chart {right!r}")


class DegreeError(InputError):
    """An operation received a form or tensor of unsupported degree."""


class PreconditionError(InputError):
    """A check refuses to run because its hypotheses do not hold."""


class DegenerateMetricError(InputError):
    """The metric is singular or not positive definite at a sampled point."""


class NumericalAbort(BismutkitError, ArithmeticError):
    """Evaluation produced NaN/inf or touched an excluded locus."""


class ExcludedLocusError(NumericalAbort):
    """A point lies on (or inside) a chart's excluded locus."""


class JetOrderError(NumericalAbort):
    """A derivative was requested beyond the truncation order of a jet."""
