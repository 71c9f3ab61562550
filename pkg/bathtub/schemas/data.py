"""
Pydantic schemas for raw observations: i.i.d. samples, right-censored life data,
fixed-design regression data and failure-time logs of a counting process.
"""

from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from bathtub.models.stepfn import Interval


def _readonly(values: Any, dtype: type = float) -> NDArray:
    arr = np.array(values, dtype=dtype).ravel()
    arr.setflags(write=False)
    return arr


class _ObservationBase(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Sample(_ObservationBase):
    """i.i.d. observations on a bounded interval."""

    values: np.ndarray
    domain: Interval

    @field_validator("values", mode="before")
    @classmethod
    def as_array(cls, v: Any) -> NDArray:
        return _readonly(v)

    @model_validator(mode="after")
    def check_within_domain(self) -> "Sample":
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Sample values must be finite")
        outside = (self.values < self.domain.a) | (self.values > self.domain.b)
        if np.any(outside):
            raise ValueError(
                f"{int(outside.sum())} value(s) outside {self.domain}, "
                f"first at index {int(np.argmax(outside))}"
            )
        return self

    @property
    def size(self) -> int:
        return self.values.size

    def scaled(self, factor: float) -> "Sample":
        return Sample(values=self.values * factor, domain=self.domain.scaled(factor))


class CensoredSample(_ObservationBase):
    """Right-censored life data X = min(T, U) with death indicators, on [0, horizon]."""

    times: np.ndarray
    delta: np.ndarray
    horizon: float = Field(..., gt=0, description="End c of the estimation interval [0, c]")

    @field_validator("times", mode="before")
    @classmethod
    def times_as_array(cls, v: Any) -> NDArray:
        return _readonly(v)

    @field_validator("delta", mode="before")
    @classmethod
    def delta_as_array(cls, v: Any) -> NDArray:
        return _readonly(v, dtype=np.int64)

    @model_validator(mode="after")
    def check_records(self) -> "CensoredSample":
        if self.times.size != self.delta.size:
            raise ValueError("times and delta must have equal length")
        if not np.all(np.isfinite(self.times)) or np.any(self.times < 0):
            raise ValueError("Observation times must be finite and nonnegative")
        if np.any((self.delta != 0) & (self.delta != 1)):
            raise ValueError("delta must be 0 (censored) or 1 (observed)")
        return self

    @classmethod
    def complete(cls, times: Any, horizon: float) -> "CensoredSample":
        """Uncensored life data: every lifetime observed."""
        arr = np.asarray(times, dtype=float).ravel()
        return cls(times=arr, delta=np.ones(arr.size, dtype=np.int64), horizon=horizon)

    @property
    def domain(self) -> Interval:
        return Interval(0.0, self.horizon)

    @property
    def size(self) -> int:
        return self.times.size

    @property
    def records(self) -> list[tuple[float, int]]:
        return list(zip(self.times.tolist(), self.delta.tolist()))

    def scaled(self, factor: float) -> "CensoredSample":
        return CensoredSample(
            times=self.times * factor, delta=self.delta, horizon=self.horizon * factor
        )


class RegressionData(_ObservationBase):
    """Pairs (x_i, y_i) with design points in [0, 1], kept sorted by x."""

    x: np.ndarray
    y: np.ndarray

    @field_validator("x", "y", mode="before")
    @classmethod
    def as_array(cls, v: Any) -> NDArray:
        return _readonly(v)

    @model_validator(mode="after")
    def check_pairs(self) -> "RegressionData":
        if self.x.size != self.y.size:
            raise ValueError("x and y must have equal length")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("Regression data must be finite")
        if np.any((self.x < 0) | (self.x > 1)):
            raise ValueError("Design points must lie in [0, 1]")
        if np.any(np.diff(self.x) < 0):
            order = np.argsort(self.x, kind="stable")
            object.__setattr__(self, "x", _readonly(self.x[order]))
            object.__setattr__(self, "y", _readonly(self.y[order]))
        return self

    @classmethod
    def on_grid(cls, y: Any) -> "RegressionData":
        """Responses observed on the uniform design x_i = i/n."""
        arr = np.asarray(y, dtype=float).ravel()
        return cls(x=np.arange(1, arr.size + 1) / arr.size, y=arr)

    @property
    def domain(self) -> Interval:
        return Interval(0.0, 1.0)

    @property
    def size(self) -> int:
        return self.x.size

    def design_deviation(self) -> float:
        """Largest gap between the sorted design and the uniform grid i/n."""
        if self.x.size == 0:
            return 0.0
        grid = np.arange(1, self.x.size + 1) / self.x.size
        return float(np.max(np.abs(self.x - grid)))


class EventLog(_ObservationBase):
    """Failure times of a single counting-process path observed on [0, T]."""

    times: np.ndarray
    horizon: float = Field(..., gt=0, description="Observation horizon T")

    @field_validator("times", mode="before")
    @classmethod
    def as_array(cls, v: Any) -> NDArray:
        return _readonly(v)

    @model_validator(mode="after")
    def check_times(self) -> "EventLog":
        t = self.times
        if not np.all(np.isfinite(t)):
            raise ValueError("Event times must be finite")
        if np.any(t <= 0) or np.any(t > self.horizon):
            raise ValueError(f"Event times must lie in (0, {self.horizon}]")
        if np.any(np.diff(t) <= 0):
            raise ValueError("Event times must be strictly increasing")
        return self

    @property
    def domain(self) -> Interval:
        return Interval(0.0, self.horizon)

    @property
    def count(self) -> int:
        return self.times.size

    def scaled(self, factor: float) -> "EventLog":
        return EventLog(times=self.times * factor, horizon=self.horizon * factor)


ObservedData = Sample | CensoredSample | RegressionData | EventLog
