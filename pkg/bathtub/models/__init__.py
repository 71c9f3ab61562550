"""Function representations and shared enumerations."""

from bathtub.models.shape import (
    Command,
    Direction,
    EstimatorKind,
    ModelKind,
    MonotoneFlag,
    ShapeKind,
    Suite,
)
from bathtub.models.stepfn import (
    Function,
    Interval,
    Partition,
    PiecewiseAffine,
    Side,
    StepFunction,
)

__all__ = [
    "Command",
    "Direction",
    "EstimatorKind",
    "ModelKind",
    "MonotoneFlag",
    "ShapeKind",
    "Suite",
    "Function",
    "Interval",
    "Partition",
    "PiecewiseAffine",
    "Side",
    "StepFunction",
]
