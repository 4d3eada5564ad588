"""Exception types shared across the package."""


class ThickKnotError(Exception):
    """Base class for all domain errors."""


class InvalidPolygon(ThickKnotError):
    """Vertex data violates the closed embedded polygon invariants."""


class DegenerateAngle(ThickKnotError):
    """A turning angle too close to pi makes the arc radius meaningless."""


class NoCriticalChord(ThickKnotError):
    """No doubly-critical chord candidate was found; signals a geometry bug."""


class InvalidDiagram(ThickKnotError):
    """PD data does not describe a single-component planar knot diagram."""


class NotRegular(ThickKnotError):
    """Projection failed the regularity checks; carries the report."""

    def __init__(self, report):
        super().__init__(f"projection not regular: {report.failure}")
        self.report = report


class InvalidSite(ThickKnotError):
    """A move site does not exist in the target diagram."""


class BudgetExceeded(ThickKnotError):
    """Ball enumeration passed its vertex budget."""


class Degenerate(ThickKnotError):
    """A path interpolant lost embeddedness or thickness."""


class DegenerateEvent(ThickKnotError):
    """Bisection could not isolate a single-move wall crossing."""


class InconsistentEvent(ThickKnotError):
    """A sweep event references diagram keys absent from the sampled data."""


class LevelNotSampled(ThickKnotError):
    """A filtration query used levels outside the sampled grid order."""
