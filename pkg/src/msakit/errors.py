"""Exception types raised by the model, assembly, and solver layers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelFormatError",
    "ModelValidationError",
    "AssemblyCountError",
    "NullDirection",
    "SingularSystemError",
    "MechanismMobilityError",
    "StaticIndeterminacyError",
    "EndEffectorMobilityError",
]


class ModelFormatError(Exception):
    """Model file cannot be parsed into a manipulator model.

    Carries line/column for JSON syntax errors; semantic errors name the
    offending entity in the message instead.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ModelValidationError(Exception):
    """A structurally invalid model was passed to assembly or solving."""

    def __init__(self, report):
        lines = "; ".join(f"[{e.code}] {e.entity}: {e.message}" for e in report.errors)
        super().__init__(f"model validation failed: {lines}")
        self.report = report


class AssemblyCountError(Exception):
    """Defensive re-check: assembled row count disagrees with 12 x nodes."""


@dataclass(frozen=True)
class NullDirection:
    """One node-block component of a null-space direction."""

    node: str
    kind: str  # "t" for twist, "w" for wrench
    components: np.ndarray = field(default_factory=lambda: np.zeros(6))
    weight: float = 0.0


class SingularSystemError(Exception):
    """The stiffness system cannot be factorized; carries a null-space report."""

    def __init__(self, message: str, directions: list[NullDirection] | None = None):
        self.directions = directions or []
        if self.directions:
            detail = "; ".join(
                f"{d.node}/{'twist' if d.kind == 't' else 'wrench'} "
                f"[{', '.join(f'{c:.3f}' for c in d.components)}]"
                for d in self.directions[:8]
            )
            message = f"{message}; dominant null-space blocks: {detail}"
        super().__init__(message)


class MechanismMobilityError(SingularSystemError):
    """Internal mechanism motion: some nodes can move with the end effector
    and supports held, typically from passive joints."""


class StaticIndeterminacyError(SingularSystemError):
    """Internal wrenches are not determined by the model: rigid substructure
    carries self-stress freedom, or the end effector is held rigidly so no
    finite Cartesian stiffness exists."""


class EndEffectorMobilityError(SingularSystemError):
    """The end effector can move freely in some Cartesian directions; an
    applied wrench along them has no static equilibrium."""
