"""
Pydantic schemas for shape-respecting estimates and the mode search behind them.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator

from bathtub.models.shape import ModelKind, ShapeKind
from bathtub.models.stepfn import Function, PiecewiseAffine, StepFunction
from bathtub.services.geometry import l1_distance


class ModeSelection(BaseModel):
    """Outcome of the data-driven mode / valley search."""

    model_config = ConfigDict(frozen=True)

    m: float = Field(..., description="Selected mode (unimodal) or valley (U-shaped)")
    min_value: float = Field(..., ge=0, description="Regularization error d at m")
    min_interval: tuple[float, float] = Field(
        ...,
        description="Closed interval on which the minimum is attained (may be a single point)",
    )
    evaluated: tuple[tuple[float, float], ...] = Field(
        default=(),
        description="The (m, d) pairs the search evaluated, sorted by m",
    )

    @model_validator(mode="after")
    def check_mode_inside(self) -> "ModeSelection":
        lo, hi = self.min_interval
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if not lo - slack <= self.m <= hi + slack:
            raise ValueError(f"Mode {self.m} lies outside its minimizing interval [{lo}, {hi}]")
        return self

    @property
    def evaluations(self) -> int:
        return len(self.evaluated)


class ShapeEstimate(BaseModel):
    """A shape-respecting estimate together with the envelope it is the slope of."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    f: StepFunction
    shape: ShapeKind
    mode: float
    envelope: PiecewiseAffine
    min_value: float = Field(..., ge=0, description="sup distance between input and envelope")
    selection: ModeSelection | None = None
    monotone_input: bool = True
    model: ModelKind | None = None
    l1_normalizer: float = Field(
        default=1.0,
        gt=0,
        description="Divisor turning the plain L1 error into the reported one (T for nhpp)",
    )

    def l1_error(self, truth: Function) -> float:
        """L1 distance to a truth under this estimate's convention."""
        return l1_distance(self.f, truth) / self.l1_normalizer

    def l1_errors(self, truth: Function) -> dict[str, float]:
        """Plain and normalized L1 distance to a truth."""
        plain = l1_distance(self.f, truth)
        return {"l1": plain, "normalized_l1": plain / self.l1_normalizer}
