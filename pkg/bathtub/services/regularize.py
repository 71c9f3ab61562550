"""
Shape regularization: PAVA, concave majorants / convex minorants, U-shaped and
unimodal regularizations at a given point, data-driven mode selection and the
resulting shape-respecting slope estimate.

Hulls are computed by running PAVA on the slopes of the two-sided point set of F.
Block boundaries of the pooled solution are exactly the hull vertices, and vertex
heights are copied from the point set so every envelope touches F where it should.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from sklearn.isotonic import isotonic_regression

from bathtub.core.exceptions import DomainError
from bathtub.models.shape import Direction, ShapeKind
from bathtub.models.stepfn import Function, Interval, PiecewiseAffine, Side, StepFunction
from bathtub.schemas.estimate import ModeSelection, ShapeEstimate
from bathtub.services.geometry import difference_grid, evaluate_on, merged_grid, sup_distance

logger = logging.getLogger(__name__)

# Ties between candidate modes are decided at this absolute level (scaled by sup|F|)
TIE_ATOL = 1e-12
# Bisection for the continuous search stops at this fraction of the domain length
BISECTION_RTOL = 1e-14
MAX_BISECTIONS = 200


def pava(
    values: ArrayLike,
    weights: ArrayLike | None = None,
    direction: Direction | str = Direction.NONINCREASING,
) -> NDArray[np.float64]:
    """
    Weighted L2 projection onto the monotone cone (Pool Adjacent Violators).

    Args:
        values: Sequence to project
        weights: Positive weights of equal length (defaults to ones)
        direction: NONINCREASING or NONDECREASING

    Returns:
        Block-constant sequence of the same length preserving the weighted sum

    Raises:
        DomainError: On empty input, length mismatch or a nonpositive weight
    """
    y = np.asarray(values, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("PAVA needs at least one value")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.size != y.size:
        raise DomainError(f"Got {y.size} values but {w.size} weights")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise DomainError("PAVA inputs must be finite")
    if np.any(w <= 0):
        raise DomainError("PAVA weights must be positive")
    increasing = Direction(direction) is Direction.NONDECREASING
    return np.asarray(isotonic_regression(y, sample_weight=w, increasing=increasing), dtype=float)


def _hull_points(
    F: Function, J: Interval, upper: bool
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    if not F.domain.contains_interval(J):
        raise DomainError(f"Interval {J} is not inside domain {F.domain}")
    x = merged_grid((F,), J)
    right = evaluate_on(F, x, Side.RIGHT)
    left = evaluate_on(F, x, Side.LEFT)
    y = np.maximum(right, left) if upper else np.minimum(right, left)
    # only the value itself belongs to J at its left end
    y[0] = right[0]
    return x, y


def _hull(F: Function, J: Interval, upper: bool) -> PiecewiseAffine:
    x, y = _hull_points(F, J, upper)
    widths = np.diff(x)
    direction = Direction.NONINCREASING if upper else Direction.NONDECREASING
    pooled = pava(np.diff(y) / widths, widths, direction)
    vertices = np.concatenate(([0], np.flatnonzero(pooled[1:] != pooled[:-1]) + 1, [x.size - 1]))
    return PiecewiseAffine(x[vertices], y[vertices])


def concave_majorant(F: Function, J: Interval | None = None) -> PiecewiseAffine:
    """
    Least concave majorant of F restricted to J.

    The hull runs over the right value at J.a, both one-sided values at every
    breakpoint inside J, and both one-sided values at J.b.

    Raises:
        DomainError: If J is not inside the domain of F
    """
    return _hull(F, F.domain if J is None else J, upper=True)


def convex_minorant(F: Function, J: Interval | None = None) -> PiecewiseAffine:
    """Greatest convex minorant of F restricted to J (same point set as the majorant)."""
    return _hull(F, F.domain if J is None else J, upper=False)


def _glue(left: PiecewiseAffine, right: PiecewiseAffine) -> PiecewiseAffine:
    values = np.concatenate((left.values, right.values[1:]))
    values[left.knots.size - 1] = right.values[0]
    return PiecewiseAffine(
        np.concatenate((left.knots, right.knots[1:])),
        values,
        np.concatenate((left.left_values, right.left_values[1:])),
    )


def _snap_mode(F: Function, m: float) -> float:
    I = F.domain
    if m < I.a - I.tolerance or m > I.b + I.tolerance or not np.isfinite(m):
        raise DomainError(f"Mode {m} lies outside {I}")
    if m - I.a <= I.tolerance:
        return I.a
    if I.b - m <= I.tolerance:
        return I.b
    return float(m)


def _regularization(
    F: Function, m: float, shape: ShapeKind
) -> tuple[PiecewiseAffine, float, float]:
    """Envelope at m plus the sup errors left of m (on [a, m)) and from m on ([m, b])."""
    I = F.domain
    upper_first = shape is ShapeKind.U_SHAPED
    left_env = right_env = None
    left_err = right_err = 0.0

    if m > I.a:
        J = Interval(I.a, m)
        left_env = _hull(F, J, upper=upper_first)
        _, r, l = difference_grid(F, left_env, J)
        left_err = float(max(np.max(np.abs(r[:-1])), np.max(np.abs(l[1:]))))
        if m == I.b:
            right_err = abs(float(r[-1]))
    if m < I.b:
        J = Interval(m, I.b)
        right_env = _hull(F, J, upper=not upper_first)
        right_err = sup_distance(F, right_env, J)

    if left_env is None:
        envelope = right_env
    elif right_env is None:
        envelope = left_env
    else:
        envelope = _glue(left_env, right_env)
    return envelope, left_err, right_err


def _working_shape(shape: ShapeKind, F: Function, m: float) -> tuple[ShapeKind, float]:
    if shape is ShapeKind.NONINCREASING:
        return ShapeKind.U_SHAPED, F.domain.b
    if shape is ShapeKind.NONDECREASING:
        return ShapeKind.U_SHAPED, F.domain.a
    return shape, m


def regularize_at(
    F: Function, m: float, shape: ShapeKind | str = ShapeKind.U_SHAPED
) -> tuple[PiecewiseAffine, float]:
    """
    Regularization of F at the point m.

    U-shaped: concave majorant on [a, m] glued to the convex minorant on [m, b].
    Unimodal: convex minorant on [a, m] glued to the concave majorant on [m, b],
    which may jump at m. Monotone shapes ignore m and use the whole interval.

    Args:
        F: Cumulative function (step or piecewise-affine)
        m: Valley / mode in [a, b]
        shape: Shape kind

    Returns:
        (envelope, d) with d = sup over the domain of |F - envelope|

    Raises:
        DomainError: If m lies outside the domain
    """
    kind, m = _working_shape(ShapeKind(shape), F, m)
    envelope, left_err, right_err = _regularization(F, _snap_mode(F, m), kind)
    return envelope, max(left_err, right_err)


def mode_profile(
    F: Function, shape: ShapeKind | str, points: ArrayLike
) -> NDArray[np.float64]:
    """Regularization error d(m) at each of the given points."""
    return np.array([regularize_at(F, float(m), shape)[1] for m in np.asarray(points).ravel()])


class _ModeSearch:
    """
    Memoized evaluation of the split errors L(m) (left of m) and R(m) (from m on).

    L is nondecreasing and R nonincreasing in m, so d = max(L, R) is quasiconvex
    along any ordered list of candidates and its minimum sits at the crossing.
    """

    def __init__(self, F: Function, shape: ShapeKind):
        self.F = F
        self.shape = shape
        self.tol = TIE_ATOL * max(1.0, float(np.max(np.abs(F.values))))
        self._cache: dict[float, tuple[float, float]] = {}

    def errors(self, m: float) -> tuple[float, float]:
        m = float(m)
        if m not in self._cache:
            _, left_err, right_err = _regularization(self.F, m, self.shape)
            self._cache[m] = (left_err, right_err)
        return self._cache[m]

    def d(self, m: float) -> float:
        return max(self.errors(m))

    def crossing(self, candidates: NDArray[np.float64]) -> int:
        """First index with L >= R; the last candidate (b) always qualifies."""
        lo, hi = 0, candidates.size - 1
        while lo < hi:
            mid = (lo + hi) // 2
            left_err, right_err = self.errors(candidates[mid])
            if left_err >= right_err:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def best_index(self, candidates: NDArray[np.float64], k: int) -> int:
        if k == 0:
            return 0
        return k - 1 if self.d(candidates[k - 1]) <= self.d(candidates[k]) else k

    def tied_range(self, candidates: NDArray[np.float64], best: int) -> tuple[int, int]:
        """Contiguous index range whose d is within the tie tolerance of the best."""
        threshold = self.d(candidates[best]) + self.tol
        lo, hi = 0, best
        while lo < hi:
            mid = (lo + hi) // 2
            if self.d(candidates[mid]) <= threshold:
                hi = mid
            else:
                lo = mid + 1
        first = lo
        lo, hi = best, candidates.size - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.d(candidates[mid]) <= threshold:
                lo = mid
            else:
                hi = mid - 1
        return first, lo

    def evaluated(self) -> tuple[tuple[float, float], ...]:
        return tuple((m, max(errs)) for m, errs in sorted(self._cache.items()))


def _cell_boundaries(F: Function) -> NDArray[np.float64]:
    I = F.domain
    inner = F.points[(F.points > I.a) & (F.points < I.b)]
    return np.concatenate(([I.a], inner, [I.b]))


def _select_on_cells(search: _ModeSearch) -> ModeSelection:
    """Valley search for step input: the error is constant between breakpoints."""
    c = _cell_boundaries(search.F)
    I = search.F.domain
    candidates = np.concatenate(([I.a], (c[:-1] + c[1:]) / 2.0, [I.b]))
    cell_lo = np.concatenate(([I.a], c[:-1], [I.b]))
    cell_hi = np.concatenate(([I.a], c[1:], [I.b]))

    k = search.crossing(candidates)
    first, last = search.tied_range(candidates, search.best_index(candidates, k))
    lo, hi = float(cell_lo[first]), float(cell_hi[last])
    m = 0.5 * (lo + hi)
    return ModeSelection(
        m=m, min_value=search.d(m), min_interval=(lo, hi), evaluated=search.evaluated()
    )


def _select_by_bisection(search: _ModeSearch) -> ModeSelection:
    """Mode search that may land inside a cell: bracket, bisect the crossing, then close ties."""
    I = search.F.domain
    c = _cell_boundaries(search.F)
    candidates = np.sort(np.concatenate((c, (c[:-1] + c[1:]) / 2.0)))

    k = search.crossing(candidates)
    if k == 0:
        # L >= R already at a, and L only grows
        best = I.a
    else:
        lo, hi = float(candidates[k - 1]), float(candidates[k])
        for _ in range(MAX_BISECTIONS):
            mid = 0.5 * (lo + hi)
            if hi - lo <= BISECTION_RTOL * I.length or mid in (lo, hi):
                break
            left_err, right_err = search.errors(mid)
            if left_err >= right_err:
                hi = mid
            else:
                lo = mid
        best = min((lo, 0.5 * (lo + hi), hi), key=search.d)

    # d is nonincreasing before the crossing and nondecreasing after it
    threshold = search.d(best) + search.tol
    left = candidates[:k]
    first = _first_at_most(search, left, threshold)
    right = candidates[k:]
    last = _last_at_most(search, right, threshold)
    lo_end = min(best, float(left[first])) if first is not None else best
    hi_end = max(best, float(right[last])) if last is not None else best
    m = 0.5 * (lo_end + hi_end) if hi_end > lo_end else best
    if search.d(m) > threshold:
        m = best
    return ModeSelection(
        m=m, min_value=search.d(m), min_interval=(lo_end, hi_end), evaluated=search.evaluated()
    )


def _first_at_most(
    search: _ModeSearch, candidates: NDArray[np.float64], threshold: float
) -> int | None:
    """First index with d <= threshold, for d nonincreasing along the candidates."""
    if candidates.size == 0 or search.d(candidates[-1]) > threshold:
        return None
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if search.d(candidates[mid]) <= threshold:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _last_at_most(
    search: _ModeSearch, candidates: NDArray[np.float64], threshold: float
) -> int | None:
    """Last index with d <= threshold, for d nondecreasing along the candidates."""
    if candidates.size == 0 or search.d(candidates[0]) > threshold:
        return None
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if search.d(candidates[mid]) <= threshold:
            lo = mid
        else:
            hi = mid - 1
    return lo


def select_mode(F: Function, shape: ShapeKind | str) -> ModeSelection:
    """
    Data-driven mode (unimodal) or valley (U-shaped) selection.

    For a step function and the U-shaped kind the error profile is a cadlag step
    function jumping only at breakpoints of F: it is evaluated once per cell (at
    the midpoint) and at both endpoints, and the midpoint of the closed union of
    the minimizing cells is returned. Otherwise the minimum can sit strictly inside
    a cell: it is bracketed on breakpoints and cell midpoints, the crossing of L and
    R is bisected, and the result is widened to any candidates tied with it. Both
    searches need O(log n) envelope evaluations plus a bounded number of bisections.

    Args:
        F: Cumulative function
        shape: Shape kind; monotone kinds return the matching endpoint

    Returns:
        ModeSelection with the selected point, minimal error and the evaluated (m, d) pairs
    """
    shape = ShapeKind(shape)
    if shape.is_monotone:
        kind, m = _working_shape(shape, F, F.domain.midpoint)
        _, d = regularize_at(F, m, kind)
        return ModeSelection(m=m, min_value=d, min_interval=(m, m), evaluated=((m, d),))

    search = _ModeSearch(F, shape)
    if isinstance(F, StepFunction) and shape is ShapeKind.U_SHAPED:
        selection = _select_on_cells(search)
    else:
        selection = _select_by_bisection(search)
    logger.debug(
        f"Selected {shape.value} mode m={selection.m:.6g} d={selection.min_value:.6g} "
        f"after {selection.evaluations} evaluations"
    )
    return selection


def slope(E: PiecewiseAffine) -> StepFunction:
    """Right-continuous slope of E; at b it carries the final segment's slope."""
    return StepFunction(E.domain, E.knots[1:-1], E.slopes)


def _is_nondecreasing(F: Function) -> bool:
    if isinstance(F, StepFunction):
        return F.is_nondecreasing()
    tol = TIE_ATOL * max(1.0, float(np.max(np.abs(F.values))))
    return bool(np.all(F.slopes >= -tol) and np.all(F.values - F.left_values >= -tol))


def shape_map(
    F: Function,
    shape: ShapeKind | str,
    mode: float | None = None,
) -> ShapeEstimate:
    """
    Shape-respecting estimate from a cumulative function.

    Monotone kinds fix the valley at an endpoint. Otherwise a given `mode` is used
    as is (the known-mode estimator), or the mode is selected from the data.
    Non-monotone F is accepted and flagged.

    Args:
        F: Cumulative estimate
        shape: Shape kind
        mode: Optional known mode / valley

    Returns:
        ShapeEstimate with the slope estimate, envelope and mode
    """
    shape = ShapeKind(shape)
    monotone_input = _is_nondecreasing(F)
    if not monotone_input:
        logger.warning(
            "Cumulative input is not nondecreasing; the estimate is computed the same way "
            "but its risk guarantee is conjectural"
        )

    selection = None
    if shape.is_monotone:
        kind, m = _working_shape(shape, F, F.domain.midpoint)
    elif mode is not None:
        kind, m = shape, _snap_mode(F, float(mode))
    else:
        selection = select_mode(F, shape)
        kind, m = shape, selection.m

    envelope, d = regularize_at(F, m, kind)
    return ShapeEstimate(
        f=slope(envelope),
        shape=shape,
        mode=m,
        envelope=envelope,
        min_value=d,
        selection=selection,
        monotone_input=monotone_input,
    )
