"""Exception hierarchy for smock.

Every failure the engines can report derives from ``SmockError`` so the CLI
can map domain problems to a validation exit status and leave everything
else as a crash.
"""

from typing import Any, Dict, List, Optional, Tuple


class SmockError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class DimensionMismatch(SmockError):
    pass


class EmptyOperand(SmockError):
    pass


class InvalidStitch(SmockError):
    pass


class DisconnectedStitch(InvalidStitch):
    pass


class OverlappingStitches(SmockError):
    pass


class ZeroSeparation(SmockError):
    pass


class StitchOutsideWindow(SmockError):
    pass


class EmptyPattern(SmockError):
    pass


class LiftOutsideWindow(SmockError):
    pass


class InvalidSpacePoint(SmockError):
    """A point of X that names an unknown stitch or a free point inside one."""


class BudgetExceeded(SmockError):
    pass


class InvalidCorrespondence(SmockError):
    pass


class InvalidNormSpec(SmockError):
    pass


class NotLatticePoint(SmockError):
    pass


class SearchBoxTooSmall(SmockError):
    pass


class MethodMismatch(SmockError):
    pass


class SupportOutsideWindow(SmockError):
    pass


class UnknownFamily(SmockError):
    pass


class MissingSeed(SmockError):
    pass


class UnknownCommand(SmockError):
    pass


class SceneError(SmockError):
    """Schema problems found while reading a scene document.

    ``errors`` holds ``(path, message)`` pairs, path in dotted form
    (``experiment.ks.3``).
    """

    def __init__(self, errors: List[Tuple[str, str]]):
        summary = "; ".join(f"{path or '<root>'}: {msg}" for path, msg in errors)
        super().__init__(f"Invalid scene: {summary}", {"errors": errors})
        self.errors = errors
