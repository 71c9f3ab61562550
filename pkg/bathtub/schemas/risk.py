"""
Pydantic schemas for risk brackets, simulation truths, scored estimators and
Monte Carlo / verification reports.
"""

import math
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from bathtub.models.shape import EstimatorKind, ModelKind, ShapeKind
from bathtub.models.stepfn import Interval, Partition, PiecewiseAffine, StepFunction
from bathtub.services.geometry import cumulative, integral


# ===================
# Shape helpers
# ===================

def follows_shape(values: np.ndarray, shape: ShapeKind) -> bool:
    """True when the sequence of cell values respects the shape."""
    signs = np.sign(np.diff(np.asarray(values, dtype=float)))
    signs = signs[signs != 0]
    if shape is ShapeKind.NONINCREASING:
        return bool(np.all(signs < 0))
    if shape is ShapeKind.NONDECREASING:
        return bool(np.all(signs > 0))
    turn = 1.0 if shape is ShapeKind.U_SHAPED else -1.0
    after = np.flatnonzero(signs == turn)
    return bool(after.size == 0 or np.all(signs[after[0]:] == turn))


# ===================
# Histogram bracket
# ===================

class RiskBracket(BaseModel):
    """Bias plus fluctuation bracket of one realization on one partition."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    partition: Partition
    bias_term: float = Field(..., ge=0, description="4 * d(g, step functions on the partition)")
    fluctuation_term: float = Field(..., ge=0, description="C * sum of per-cell sup increments")
    fluctuation_sum: float = Field(..., ge=0, description="Sum of per-cell sup increments")
    total: float = Field(..., ge=0)
    C: float = Field(default=49.0, ge=1)

    @model_validator(mode="after")
    def check_total(self) -> "RiskBracket":
        expected = self.bias_term + self.fluctuation_term
        if not math.isclose(self.total, expected, rel_tol=1e-12, abs_tol=1e-12):
            raise ValueError(f"total {self.total} != bias + fluctuation {expected}")
        return self


# ===================
# Simulation truths
# ===================

class TruthSpec(BaseModel):
    """Piecewise-constant ground truth plus everything needed to simulate from it."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: ModelKind
    g: StepFunction
    horizon: Interval
    sigma: float = Field(default=0.0, ge=0, description="Regression noise standard deviation")
    censor_dist: StepFunction | PiecewiseAffine | None = Field(
        default=None,
        description="Censoring distribution function H; None means administrative censoring only",
    )
    shape: ShapeKind | None = Field(default=None, description="Declared shape of g")
    mode: float | None = Field(default=None, description="True mode / valley of g")
    label: str = ""

    @model_validator(mode="after")
    def check_truth(self) -> "TruthSpec":
        if not self.g.domain.matches(self.horizon):
            raise ValueError(f"g is defined on {self.g.domain}, expected {self.horizon}")
        if self.kind is not ModelKind.REGRESSION and np.any(self.g.values < 0):
            raise ValueError(f"A {self.kind.value} truth must be nonnegative")
        if self.kind is ModelKind.DENSITY and abs(integral(self.g) - 1.0) > 1e-9:
            raise ValueError(f"A density must integrate to 1, got {integral(self.g)}")
        if self.kind.anchored_at_zero and self.horizon.a != 0:
            raise ValueError(f"A {self.kind.value} truth must live on [0, c]")
        if self.kind is ModelKind.REGRESSION and not self.horizon.matches(Interval(0.0, 1.0)):
            raise ValueError("A regression truth must live on [0, 1]")
        if self.shape is not None and not follows_shape(self.g.values, self.shape):
            raise ValueError(f"g is not {self.shape.value}")
        if self.mode is not None and not self.horizon.contains(self.mode):
            raise ValueError(f"Mode {self.mode} lies outside {self.horizon}")
        if self.censor_dist is not None and not self.censor_dist.domain.matches(self.horizon):
            raise ValueError("The censoring distribution must share the horizon")
        return self

    @property
    def G(self) -> PiecewiseAffine:
        """Cumulative truth."""
        return cumulative(self.g)

    @property
    def M(self) -> float:
        """sup g."""
        return float(np.max(self.g.values))

    @property
    def l1_normalizer(self) -> float:
        return self.horizon.length if self.kind is ModelKind.NHPP else 1.0


# ===================
# Estimators
# ===================

class EstimatorSpec(BaseModel):
    """Estimator scored by the Monte Carlo harness."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: EstimatorKind = EstimatorKind.SHAPE
    shape: ShapeKind | None = None
    partition: Partition | None = None
    mode: float | None = None

    @model_validator(mode="after")
    def check_parameters(self) -> "EstimatorSpec":
        if self.kind is EstimatorKind.HISTOGRAM and self.partition is None:
            raise ValueError("A histogram estimator needs a partition")
        if self.kind is EstimatorKind.KNOWN_MODE and self.mode is None:
            raise ValueError("A known-mode estimator needs a mode")
        return self

    @classmethod
    def shape_pipeline(cls, shape: ShapeKind | None = None) -> "EstimatorSpec":
        return cls(kind=EstimatorKind.SHAPE, shape=shape)

    @classmethod
    def histogram(cls, partition: Partition) -> "EstimatorSpec":
        return cls(kind=EstimatorKind.HISTOGRAM, partition=partition)

    @classmethod
    def known_mode(cls, mode: float, shape: ShapeKind | None = None) -> "EstimatorSpec":
        return cls(kind=EstimatorKind.KNOWN_MODE, mode=mode, shape=shape)

    @classmethod
    def constant_mle(cls) -> "EstimatorSpec":
        return cls(kind=EstimatorKind.CONSTANT_MLE)

    @property
    def label(self) -> str:
        if self.kind is EstimatorKind.HISTOGRAM and self.partition is not None:
            return f"histogram[D={self.partition.size}]"
        if self.kind is EstimatorKind.KNOWN_MODE:
            return f"known_mode[m={self.mode!r}]"
        return self.kind.value


# ===================
# Reports
# ===================

class RiskReport(BaseModel):
    """Aggregated Monte Carlo risk or verification outcome."""

    model_config = ConfigDict(frozen=True)

    name: str
    mean_l1: float = Field(..., description="Mean per-replication L1 error (or checked quantity)")
    stderr: float = Field(..., ge=0, description="Sample standard deviation / sqrt(replications)")
    replications: int = Field(..., ge=1)
    per_rep: tuple[float, ...] | None = None
    violations: int = Field(default=0, ge=0)
    metrics: dict[str, float] = Field(default_factory=dict)
    violation_rows: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def rows(self) -> list[tuple[str, Any]]:
        """(metric, value) rows in a stable order."""
        rows: list[tuple[str, Any]] = [
            ("name", self.name),
            ("mean_l1", self.mean_l1),
            ("stderr", self.stderr),
            ("replications", self.replications),
            ("violations", self.violations),
            ("passed", int(self.passed)),
        ]
        rows.extend(sorted(self.metrics.items()))
        rows.extend(("violation", row) for row in self.violation_rows)
        return rows
