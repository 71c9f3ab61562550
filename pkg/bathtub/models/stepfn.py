"""
Exact representations of the functions the toolkit works with.

- Interval: a bounded closed interval [a, b].
- Partition: a finite partition t_0 = a < ... < t_D = b.
- StepFunction: a cadlag piecewise-constant function. Cumulative estimates,
  counting paths, distribution functions and estimator outputs all live here.
- PiecewiseAffine: a continuous piecewise-affine function with at most one jump.
  Envelopes and antiderivatives live here.

All instances are immutable; their numpy arrays are flagged read-only.
"""

import enum
import math
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from bathtub.core.exceptions import DomainError
from bathtub.models.shape import MonotoneFlag

# Breakpoints closer than this fraction of the domain length are merged
MERGE_RTOL = 1e-12


class Side(str, enum.Enum):
    """Which one-sided value to evaluate."""

    RIGHT = "right"
    LEFT = "left"


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Interval:
    """A bounded interval [a, b] with a < b, both finite."""

    a: float
    b: float

    def __post_init__(self) -> None:
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"Interval endpoints must be finite, got [{a}, {b}]")
        if not a < b:
            raise DomainError(f"Interval requires a < b, got [{a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def tolerance(self) -> float:
        """Absolute tolerance used to compare points of this interval."""
        return MERGE_RTOL * self.length

    def contains(self, t: float) -> bool:
        return self.a <= t <= self.b

    def contains_interval(self, other: "Interval") -> bool:
        """True when `other` lies inside this interval up to the merge tolerance."""
        tol = self.tolerance
        return other.a >= self.a - tol and other.b <= self.b + tol

    def matches(self, other: "Interval") -> bool:
        """True when both endpoints agree up to the merge tolerance."""
        tol = self.tolerance
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol

    def scaled(self, factor: float) -> "Interval":
        return Interval(self.a * factor, self.b * factor)

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Parse the `a,b` notation used on the command line."""
        parts = [p.strip() for p in str(text).strip().strip("[]()").split(",")]
        if len(parts) != 2:
            raise DomainError(f"Interval must be given as 'a,b', got '{text}'")
        try:
            return cls(float(parts[0]), float(parts[1]))
        except ValueError as e:
            if isinstance(e, DomainError):
                raise
            raise DomainError(f"Interval endpoints must be numbers, got '{text}'") from e

    def __str__(self) -> str:
        return f"[{self.a!r}, {self.b!r}]"


class Partition:
    """A finite partition of an interval into D >= 1 cells."""

    __slots__ = ("_endpoints",)

    def __init__(self, endpoints: ArrayLike):
        e = np.asarray(endpoints, dtype=float).ravel()
        if e.size < 2:
            raise DomainError("A partition needs at least two endpoints")
        if not np.all(np.isfinite(e)):
            raise DomainError("Partition endpoints must be finite")
        if np.any(np.diff(e) <= 0):
            raise DomainError("Partition endpoints must be strictly increasing")
        self._endpoints = _frozen(e)

    @classmethod
    def uniform(cls, domain: Interval, cells: int) -> "Partition":
        """Equal-width partition of `domain` into `cells` cells."""
        if cells < 1:
            raise DomainError(f"A partition needs at least one cell, got {cells}")
        e = np.linspace(domain.a, domain.b, cells + 1)
        e[0], e[-1] = domain.a, domain.b
        return cls(e)

    @classmethod
    def trivial(cls, domain: Interval) -> "Partition":
        return cls([domain.a, domain.b])

    @property
    def endpoints(self) -> NDArray[np.float64]:
        return self._endpoints

    @property
    def size(self) -> int:
        """Number of cells D."""
        return self._endpoints.size - 1

    @property
    def domain(self) -> Interval:
        return Interval(self._endpoints[0], self._endpoints[-1])

    @property
    def lengths(self) -> NDArray[np.float64]:
        return np.diff(self._endpoints)

    def cells(self) -> list[Interval]:
        e = self._endpoints
        return [Interval(e[k], e[k + 1]) for k in range(self.size)]

    def spans(self, domain: Interval) -> bool:
        return self.domain.matches(domain)

    def __repr__(self) -> str:
        return f"Partition(D={self.size}, domain={self.domain})"


def _check_domain(domain: Interval, t: NDArray[np.float64]) -> None:
    if t.size and (np.any(np.isnan(t)) or t.min() < domain.a or t.max() > domain.b):
        raise DomainError(
            f"Evaluation point outside domain {domain}",
            details={"min": float(np.nanmin(t)), "max": float(np.nanmax(t))},
        )


def _merge_breakpoints(
    domain: Interval,
    breakpoints: NDArray[np.float64],
    values: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Drop cells narrower than the merge tolerance; the later value wins."""
    if breakpoints.size == 0:
        return breakpoints, values
    tol = domain.tolerance
    if np.any(np.diff(breakpoints) < 0):
        raise DomainError("Breakpoints must be increasing")
    if breakpoints[0] < domain.a - tol or breakpoints[-1] > domain.b + tol:
        raise DomainError(f"Breakpoints must lie in (a, b] of {domain}")
    breakpoints = np.minimum(breakpoints, domain.b)

    lead = int(np.searchsorted(breakpoints, domain.a + tol, side="right"))
    if lead:
        breakpoints, values = breakpoints[lead:], values[lead:]

    if breakpoints.size > 1 and np.any(np.diff(breakpoints) < tol):
        kept_bp: list[float] = []
        kept_v: list[float] = [float(values[0])]
        for t, v in zip(breakpoints, values[1:]):
            if kept_bp and t - kept_bp[-1] < tol:
                kept_v[-1] = float(v)
            else:
                kept_bp.append(float(t))
                kept_v.append(float(v))
        breakpoints, values = np.array(kept_bp), np.array(kept_v)
    return breakpoints, values


class StepFunction:
    """
    Cadlag piecewise-constant function on a bounded interval.

    `values[0]` holds on [a, t_1), `values[k]` on [t_k, t_{k+1}), and the last value
    on [t_K, b]. A breakpoint may sit at b itself, in which case the last value is
    the value at b only.
    """

    __slots__ = ("_domain", "_breakpoints", "_values", "_monotone")

    def __init__(
        self,
        domain: Interval,
        breakpoints: ArrayLike = (),
        values: ArrayLike = (0.0,),
        monotone: MonotoneFlag = MonotoneFlag.NONE,
    ):
        bp = np.asarray(breakpoints, dtype=float).ravel()
        v = np.asarray(values, dtype=float).ravel()
        if v.size != bp.size + 1:
            raise DomainError(
                f"Expected {bp.size + 1} values for {bp.size} breakpoints, got {v.size}"
            )
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(v))):
            raise DomainError("Breakpoints and values must be finite")
        bp, v = _merge_breakpoints(domain, bp, v)

        monotone = MonotoneFlag(monotone)
        if monotone is MonotoneFlag.NONDECREASING:
            scale = max(1.0, float(np.max(np.abs(v))))
            if np.any(np.diff(v) < -MERGE_RTOL * scale):
                raise DomainError("Values of a nondecreasing step function must not decrease")

        self._domain = domain
        self._breakpoints = _frozen(bp)
        self._values = _frozen(v)
        self._monotone = monotone

    @classmethod
    def constant(cls, domain: Interval, value: float = 0.0) -> "StepFunction":
        return cls(domain, (), (value,))

    @property
    def domain(self) -> Interval:
        return self._domain

    @property
    def breakpoints(self) -> NDArray[np.float64]:
        return self._breakpoints

    @property
    def values(self) -> NDArray[np.float64]:
        return self._values

    @property
    def monotone(self) -> MonotoneFlag:
        return self._monotone

    @property
    def points(self) -> NDArray[np.float64]:
        """Points where the function may fail to be affine."""
        return self._breakpoints

    @property
    def jumps(self) -> NDArray[np.float64]:
        return np.diff(self._values)

    def is_nondecreasing(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self._values))))
        return bool(np.all(self.jumps >= -MERGE_RTOL * scale))

    def eval(self, t: ArrayLike, side: Side | str = Side.RIGHT) -> Any:
        """
        Evaluate at one point or an array of points.

        Args:
            t: Point(s) inside the domain
            side: RIGHT for the cadlag value, LEFT for the left limit

        Returns:
            A float for scalar input, an array otherwise

        Raises:
            DomainError: If any point lies outside the domain
        """
        arr = np.asarray(t, dtype=float)
        _check_domain(self._domain, arr)
        how = "right" if Side(side) is Side.RIGHT else "left"
        out = self._values[np.searchsorted(self._breakpoints, arr, side=how)]
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval

    def cells(self) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """(starts, widths, values) of the cells with positive width."""
        starts = np.concatenate(([self._domain.a], self._breakpoints))
        ends = np.concatenate((self._breakpoints, [self._domain.b]))
        widths = ends - starts
        keep = widths > 0
        return starts[keep], widths[keep], self._values[keep]

    def simplified(self) -> "StepFunction":
        """Same function without breakpoints where the value does not change."""
        keep = self.jumps != 0
        return StepFunction(
            self._domain,
            self._breakpoints[keep],
            np.concatenate(([self._values[0]], self._values[1:][keep])),
            self._monotone,
        )

    def __repr__(self) -> str:
        return (
            f"StepFunction(domain={self._domain}, pieces={self._values.size}, "
            f"monotone={self._monotone.value})"
        )


class PiecewiseAffine:
    """
    Piecewise-affine function through knots a = x_0 < ... < x_K = b.

    `values[i]` is the value at x_i and `left_values[i]` the left limit there. The
    function is continuous except at most at one knot.
    """

    __slots__ = ("_domain", "_knots", "_values", "_left")

    def __init__(
        self,
        knots: ArrayLike,
        values: ArrayLike,
        left_values: ArrayLike | None = None,
    ):
        x = np.asarray(knots, dtype=float).ravel()
        y = np.asarray(values, dtype=float).ravel()
        left = y.copy() if left_values is None else np.array(left_values, dtype=float).ravel()
        if x.size < 2:
            raise DomainError("A piecewise-affine function needs at least two knots")
        if y.size != x.size or left.size != x.size:
            raise DomainError("Knots, values and left values must have equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(left))):
            raise DomainError("Knots and values must be finite")
        if np.any(np.diff(x) <= 0):
            raise DomainError("Knots must be strictly increasing")

        left[0] = y[0]
        scale = max(1.0, float(np.max(np.abs(y))))
        gaps = np.abs(left - y) > MERGE_RTOL * scale
        left[~gaps] = y[~gaps]
        if int(gaps.sum()) > 1:
            raise DomainError("A piecewise-affine function may jump at most once")

        self._domain = Interval(x[0], x[-1])
        self._knots = _frozen(x)
        self._values = _frozen(y)
        self._left = _frozen(left)

    @classmethod
    def affine(cls, domain: Interval, start: float, end: float) -> "PiecewiseAffine":
        """The affine function from (a, start) to (b, end)."""
        return cls([domain.a, domain.b], [start, end])

    @classmethod
    def constant(cls, domain: Interval, value: float = 0.0) -> "PiecewiseAffine":
        return cls.affine(domain, value, value)

    @property
    def domain(self) -> Interval:
        return self._domain

    @property
    def knots(self) -> NDArray[np.float64]:
        return self._knots

    @property
    def values(self) -> NDArray[np.float64]:
        return self._values

    @property
    def left_values(self) -> NDArray[np.float64]:
        return self._left

    @property
    def points(self) -> NDArray[np.float64]:
        return self._knots

    @property
    def slopes(self) -> NDArray[np.float64]:
        """Slope of each knot-to-knot segment."""
        return (self._left[1:] - self._values[:-1]) / np.diff(self._knots)

    @property
    def jump_at(self) -> float | None:
        idx = np.flatnonzero(self._left != self._values)
        return float(self._knots[idx[0]]) if idx.size else None

    def eval(self, t: ArrayLike, side: Side | str = Side.RIGHT) -> Any:
        """Evaluate the value (RIGHT) or left limit (LEFT) at one point or an array."""
        arr = np.asarray(t, dtype=float)
        _check_domain(self._domain, arr)
        x, y, left = self._knots, self._values, self._left
        last = x.size - 2
        if Side(side) is Side.RIGHT:
            idx = np.clip(np.searchsorted(x, arr, side="right") - 1, 0, last)
            edge, edge_value = arr >= x[-1], y[-1]
        else:
            idx = np.clip(np.searchsorted(x, arr, side="left") - 1, 0, last)
            edge, edge_value = arr <= x[0], y[0]
        theta = (arr - x[idx]) / (x[idx + 1] - x[idx])
        out = np.where(edge, edge_value, y[idx] * (1.0 - theta) + left[idx + 1] * theta)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval

    def __repr__(self) -> str:
        jump = self.jump_at
        suffix = f", jump_at={jump!r}" if jump is not None else ""
        return f"PiecewiseAffine(domain={self._domain}, knots={self._knots.size}{suffix})"


Function = Union[StepFunction, PiecewiseAffine]
