"""
Integral and supremum geometry of step and piecewise-affine functions.

Every operation works on the merged breakpoint/knot grid of its arguments. On each
open grid cell the difference of two such functions is affine, so integrals are
exact per cell and suprema are attained at one-sided limits at cell boundaries.
"""

import math

import numpy as np
from numpy.typing import NDArray

from bathtub.core.exceptions import DomainError
from bathtub.models.stepfn import Function, Interval, PiecewiseAffine, Side, StepFunction


def _resolve_interval(f: Function, g: Function, J: Interval | None) -> Interval:
    if J is None:
        if not f.domain.matches(g.domain):
            raise DomainError(
                f"Mismatched domains {f.domain} and {g.domain}",
                details={"left": str(f.domain), "right": str(g.domain)},
            )
        return f.domain
    if not (f.domain.contains_interval(J) and g.domain.contains_interval(J)):
        raise DomainError(f"Interval {J} is not inside both domains {f.domain} and {g.domain}")
    return J


def evaluate_on(f: Function, grid: NDArray[np.float64], side: Side) -> NDArray[np.float64]:
    # grid endpoints may differ from f's domain by less than the merge tolerance
    clipped = np.clip(grid, f.domain.a, f.domain.b)
    return np.asarray(f.eval(clipped, side), dtype=float)


def merged_grid(functions: tuple[Function, ...], J: Interval) -> NDArray[np.float64]:
    """J's endpoints plus every breakpoint or knot strictly inside J, sorted."""
    inner = np.concatenate([np.asarray(f.points, dtype=float) for f in functions])
    inner = inner[(inner > J.a) & (inner < J.b)]
    return np.concatenate(([J.a], np.unique(inner), [J.b]))


def difference_grid(
    f: Function,
    g: Function,
    J: Interval | None = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """
    Tabulate D = f - g on the merged grid of J.

    Returns:
        (grid, right, left) where right[i] = D(x_i) and left[i] = D(x_i-).
        left[0] is the value at J.a and carries no extra information.

    Raises:
        DomainError: If J is not inside both domains (or, with J omitted, the
            domains differ)
    """
    J = _resolve_interval(f, g, J)
    grid = merged_grid((f, g), J)
    right = evaluate_on(f, grid, Side.RIGHT) - evaluate_on(g, grid, Side.RIGHT)
    left = evaluate_on(f, grid, Side.LEFT) - evaluate_on(g, grid, Side.LEFT)
    left[0] = right[0]
    return grid, right, left


def sup_distance(F: Function, G: Function, J: Interval | None = None) -> float:
    """sup over t in J of |F(t) - G(t)|, left limits included."""
    _, right, left = difference_grid(F, G, J)
    return float(max(np.max(np.abs(right)), np.max(np.abs(left))))


def sup_difference(F: Function, G: Function, J: Interval | None = None) -> float:
    """Signed supremum sup over t in J of (F(t) - G(t)), left limits included."""
    _, right, left = difference_grid(F, G, J)
    return float(max(np.max(right), np.max(left)))


def sup_increment(F: Function, G: Function, J: Interval) -> float:
    """sup over t in J of |D(t) - D(J.a)| with D = F - G."""
    _, right, left = difference_grid(F, G, J)
    anchor = right[0]
    return float(max(np.max(np.abs(right - anchor)), np.max(np.abs(left - anchor))))


def _abs_affine_integral(d0: NDArray, d1: NDArray, w: NDArray) -> NDArray[np.float64]:
    """Integral of |affine| over cells of width w running from d0 to d1."""
    a0, a1 = np.abs(d0), np.abs(d1)
    same_sign = d0 * d1 >= 0
    denom = np.where(same_sign, 1.0, a0 + a1)
    crossing = w * (d0 * d0 + d1 * d1) / (2.0 * denom)
    return np.where(same_sign, w * (a0 + a1) / 2.0, crossing)


def l1_distance(
    f: Function,
    g: Function,
    J: Interval | None = None,
    *,
    normalized: bool = False,
) -> float:
    """
    Exact L1 distance between f and g over J.

    Args:
        f: Step or piecewise-affine function
        g: Step or piecewise-affine function
        J: Interval of integration; defaults to the common domain
        normalized: Divide by the length of J (the event-process convention)

    Returns:
        The integral of |f - g| over J

    Raises:
        DomainError: On mismatched domains
    """
    J = _resolve_interval(f, g, J)
    grid, right, left = difference_grid(f, g, J)
    cells = _abs_affine_integral(right[:-1], left[1:], np.diff(grid))
    total = math.fsum(cells.tolist())
    return total / J.length if normalized else total


def integral(f: Function, J: Interval | None = None) -> float:
    """Signed integral of f over J (defaults to its domain)."""
    J = f.domain if J is None else J
    if not f.domain.contains_interval(J):
        raise DomainError(f"Interval {J} is not inside domain {f.domain}")
    grid = merged_grid((f,), J)
    right = evaluate_on(f, grid, Side.RIGHT)
    left = evaluate_on(f, grid, Side.LEFT)
    return math.fsum((np.diff(grid) * (right[:-1] + left[1:]) / 2.0).tolist())


def interval_stats(g: StepFunction, J: Interval) -> tuple[float, float]:
    """
    Mean and oscillation of g over J.

    Returns:
        (mean, osc) with mean = (1/l(J)) * integral of g over J and
        osc = integral over J of |g - mean|

    Raises:
        DomainError: If J is not inside the domain of g
    """
    mean = integral(g, J) / J.length
    osc = l1_distance(g, StepFunction.constant(J, mean), J)
    return mean, osc


def cumulative(f: StepFunction) -> PiecewiseAffine:
    """Continuous antiderivative of f anchored at 0 at the left endpoint."""
    starts, widths, values = f.cells()
    knots = np.concatenate((starts, [f.domain.b]))
    running = np.concatenate(([0.0], np.cumsum(widths * values)))
    return PiecewiseAffine(knots, running)
