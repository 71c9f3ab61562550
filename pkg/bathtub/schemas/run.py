"""
Pydantic schema for one CLI run, merged from a config file and flags.
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bathtub.models.shape import Command, EstimatorKind, ModelKind, ShapeKind, Suite
from bathtub.models.stepfn import Interval


class RunConfig(BaseModel):
    """Validated parameters of an estimate, simulate or verify run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    model: ModelKind | None = None
    shape: ShapeKind | None = None
    interval: tuple[float, float] | None = Field(
        default=None, description="Estimation interval as (a, b); parsed from 'a,b'"
    )
    mode: float | None = None
    seed: int = 0
    reps: int | None = Field(
        default=None, ge=1, description="Replications (simulate) or trials (verify); default 100"
    )
    input_path: str | None = None
    output_path: str = "-"
    suite: Suite = Suite.ALL
    constant: float = Field(default=49.0, ge=1, description="Risk bracket constant C")
    size: float | None = Field(default=None, gt=0, description="n, or T for nhpp")
    sigma: float | None = Field(default=None, ge=0, description="Regression noise override")
    estimator: EstimatorKind = EstimatorKind.SHAPE
    bins: int | None = Field(default=None, ge=1, description="Cells of a uniform histogram")

    @field_validator("interval", mode="before")
    @classmethod
    def parse_interval(cls, v: Any) -> Any:
        if isinstance(v, str):
            parsed = Interval.parse(v)
            return (parsed.a, parsed.b)
        if isinstance(v, Interval):
            return (v.a, v.b)
        return v

    @model_validator(mode="after")
    def check_run(self) -> "RunConfig":
        if self.interval is not None:
            Interval(*self.interval)
            if self.model is not None and self.model.anchored_at_zero and self.interval[0] != 0:
                raise ValueError(f"A {self.model.value} interval must start at 0")
        if self.command is Command.ESTIMATE:
            if self.input_path is None:
                raise ValueError("estimate needs an input path")
            if self.model is None:
                raise ValueError("estimate needs a model")
        if self.command is Command.SIMULATE and self.model is None:
            raise ValueError("simulate needs a model")
        if self.estimator is EstimatorKind.HISTOGRAM and self.bins is None:
            raise ValueError("the histogram estimator needs a number of bins")
        if self.estimator is EstimatorKind.KNOWN_MODE and self.mode is None:
            raise ValueError("the known-mode estimator needs a mode")
        return self

    @property
    def domain(self) -> Interval | None:
        return None if self.interval is None else Interval(*self.interval)
