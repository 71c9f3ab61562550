"""
Enumerations shared across the toolkit: shape constraints, data models,
estimator kinds and verification suites.
"""

import enum


class ShapeKind(str, enum.Enum):
    """Shape constraint imposed on an estimate."""

    U_SHAPED = "u_shaped"
    UNIMODAL = "unimodal"
    NONINCREASING = "nonincreasing"
    NONDECREASING = "nondecreasing"

    @property
    def is_monotone(self) -> bool:
        return self in (ShapeKind.NONINCREASING, ShapeKind.NONDECREASING)


class Direction(str, enum.Enum):
    """Direction of a monotone cone."""

    NONINCREASING = "nonincreasing"
    NONDECREASING = "nondecreasing"


class MonotoneFlag(str, enum.Enum):
    """Monotonicity tag carried by a step function."""

    NONDECREASING = "nondecreasing"
    NONE = "none"


class ModelKind(str, enum.Enum):
    """Observation scheme a cumulative estimate is built from."""

    DENSITY = "density"
    REGRESSION = "regression"
    HAZARD = "hazard"
    NHPP = "nhpp"

    @property
    def default_shape(self) -> ShapeKind:
        """Unimodal for densities and regression functions, U-shaped for rates."""
        if self in (ModelKind.DENSITY, ModelKind.REGRESSION):
            return ShapeKind.UNIMODAL
        return ShapeKind.U_SHAPED

    @property
    def anchored_at_zero(self) -> bool:
        """Hazard and NHPP models live on [0, horizon]."""
        return self in (ModelKind.HAZARD, ModelKind.NHPP)


class EstimatorKind(str, enum.Enum):
    """Estimators the Monte Carlo harness can score."""

    SHAPE = "shape"
    HISTOGRAM = "histogram"
    KNOWN_MODE = "known_mode"
    CONSTANT_MLE = "constant_mle"


class Suite(str, enum.Enum):
    """Verification suites. Values are the names accepted by `--suite`."""

    RISK_BRACKET = "theorem1"
    STABILITY = "lemma2"
    OSCILLATION = "lemma4"
    REGULARIZATION_GAP = "lemma5"
    MARSHALL = "marshall"
    HISTOGRAM_SANDWICH = "eq5_sandwich"
    RATE_BOUNDS = "prop_bounds"
    DOMINANCE = "dominance"
    ALL = "all"


class Command(str, enum.Enum):
    """CLI subcommands."""

    ESTIMATE = "estimate"
    SIMULATE = "simulate"
    VERIFY = "verify"
