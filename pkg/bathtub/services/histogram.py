"""
Variable-binwidth histograms, cell projections, the best L1 step approximation of
a truth on a partition, and the per-realization bias + fluctuation bracket.
"""

import logging
import math

import numpy as np
from numpy.typing import NDArray

from bathtub.core.exceptions import DomainError, UsageError
from bathtub.models.stepfn import Function, Partition, PiecewiseAffine, Side, StepFunction
from bathtub.schemas.risk import RiskBracket
from bathtub.services.geometry import evaluate_on, integral, l1_distance, sup_increment

logger = logging.getLogger(__name__)

DEFAULT_CONSTANT = 49.0
# Sub-cells per partition cell when a truth is not piecewise constant
AFFINE_GRID = 2048


def _check_spans(f: Function, pi: Partition) -> None:
    if not pi.spans(f.domain):
        raise DomainError(f"Partition {pi.domain} does not span the domain {f.domain}")


def _cell_function(pi: Partition, values: NDArray[np.float64]) -> StepFunction:
    return StepFunction(pi.domain, pi.endpoints[1:-1], values)


def histogram_estimate(G_hat: Function, pi: Partition) -> StepFunction:
    """
    Histogram with value (G_hat(t_k) - G_hat(t_{k-1})) / (t_k - t_{k-1}) on each cell.

    Raises:
        DomainError: If the partition does not span the domain of G_hat
    """
    _check_spans(G_hat, pi)
    levels = evaluate_on(G_hat, pi.endpoints, Side.RIGHT)
    return _cell_function(pi, np.diff(levels) / pi.lengths)


def projection(g: Function, pi: Partition) -> StepFunction:
    """L2 projection of g onto step functions on the partition (cell means)."""
    _check_spans(g, pi)
    means = [integral(g, cell) / cell.length for cell in pi.cells()]
    return _cell_function(pi, np.array(means))


def _cell_pieces(g: Function, cell) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(values, widths) of g on a cell; affine truths are sampled at sub-cell midpoints."""
    if isinstance(g, PiecewiseAffine):
        edges = np.linspace(cell.a, cell.b, AFFINE_GRID + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        return np.asarray(g.eval(mids), dtype=float), np.diff(edges)
    starts, widths, values = g.cells()
    ends = starts + widths
    lo = np.maximum(starts, cell.a)
    hi = np.minimum(ends, cell.b)
    keep = hi > lo
    return values[keep], (hi - lo)[keep]


def _weighted_median_distance(values: NDArray, widths: NDArray) -> float:
    order = np.argsort(values, kind="stable")
    v, w = values[order], widths[order]
    cum = np.cumsum(w)
    median = v[int(np.searchsorted(cum, 0.5 * cum[-1], side="left"))]
    return math.fsum((w * np.abs(v - median)).tolist())


def best_step_distance(g: Function, pi: Partition, method: str = "exact_median") -> float:
    """
    L1 distance from g to the step functions on a partition.

    Args:
        g: Truth; piecewise-affine truths are resolved on a fixed sub-cell grid
        pi: Partition spanning the domain of g
        method: "exact_median" for the infimum (a weighted median per cell), or
            "projection_bound" for the distance to the cell-mean projection, which
            is at most twice the infimum

    Returns:
        The requested distance
    """
    _check_spans(g, pi)
    if method == "projection_bound":
        return l1_distance(projection(g, pi), g)
    if method != "exact_median":
        raise UsageError(f"Unknown method '{method}'")
    per_cell = [_weighted_median_distance(*_cell_pieces(g, cell)) for cell in pi.cells()]
    return math.fsum(per_cell)


def cell_increments(
    G_hat: Function, G: Function, pi: Partition
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Per-cell statistics of Z = G_hat - G.

    Returns:
        (sup_increments, end_increments) with sup_k = sup over cell k of
        |Z(t) - Z(t_{k-1})| and end_k = |Z(t_k) - Z(t_{k-1})|
    """
    _check_spans(G_hat, pi)
    sups = np.array([sup_increment(G_hat, G, cell) for cell in pi.cells()])
    z = evaluate_on(G_hat, pi.endpoints, Side.RIGHT) - evaluate_on(G, pi.endpoints, Side.RIGHT)
    return sups, np.abs(np.diff(z))


def risk_bracket(
    g: Function,
    G: Function,
    G_hat: Function,
    pi: Partition,
    C: float = DEFAULT_CONSTANT,
) -> RiskBracket:
    """
    Bias + fluctuation bracket 4 d(g, H_pi) + C * sum_k sup |Z(t) - Z(t_{k-1})|.

    Raises:
        DomainError: If C < 1 or the partition does not span the domain
    """
    if not C >= 1:
        raise DomainError(f"The bracket constant must be at least 1, got {C}")
    bias = 4.0 * best_step_distance(g, pi, "exact_median")
    sups, _ = cell_increments(G_hat, G, pi)
    fluctuation_sum = math.fsum(sups.tolist())
    fluctuation = C * fluctuation_sum
    return RiskBracket(
        partition=pi,
        bias_term=bias,
        fluctuation_term=fluctuation,
        fluctuation_sum=fluctuation_sum,
        total=bias + fluctuation,
        C=C,
    )


def condition4_diagnostic(
    sup_increments: NDArray[np.float64],
    end_increments: NDArray[np.float64],
    pi: Partition | None = None,
) -> tuple[float, float, NDArray[np.float64]]:
    """
    Empirical ratio of expected sup increment to expected endpoint increment.

    Args:
        sup_increments: Array [replications, cells] of per-cell sup increments
        end_increments: Array [replications, cells] of per-cell endpoint increments
        pi: Optional partition the columns belong to

    Returns:
        (max ratio over cells, delta-method standard error at that cell, per-cell ratios)

    Raises:
        UsageError: With fewer than 2 replications or mismatched shapes
    """
    sups = np.atleast_2d(np.asarray(sup_increments, dtype=float))
    ends = np.atleast_2d(np.asarray(end_increments, dtype=float))
    if sups.shape != ends.shape:
        raise UsageError("Sup and endpoint statistics must have the same shape")
    reps, cells = sups.shape
    if reps < 2:
        raise UsageError(f"Need at least 2 replications, got {reps}")
    if pi is not None and cells != pi.size:
        raise UsageError(f"Expected {pi.size} cells, got {cells}")

    mean_sup, mean_end = sups.mean(axis=0), ends.mean(axis=0)
    ratios = np.empty(cells)
    stderrs = np.zeros(cells)
    for k in range(cells):
        if mean_end[k] > 0:
            r = mean_sup[k] / mean_end[k]
            cov = np.cov(sups[:, k], ends[:, k], ddof=1)
            var = (cov[0, 0] - 2.0 * r * cov[0, 1] + r * r * cov[1, 1]) / mean_end[k] ** 2
            stderrs[k] = math.sqrt(max(var, 0.0) / reps)
        else:
            # a degenerate cell is at its endpoint ratio only when nothing moves
            r = 1.0 if mean_sup[k] == 0 else math.inf
        ratios[k] = r
    worst = int(np.argmax(ratios))
    return float(ratios[worst]), float(stderrs[worst]), ratios


def condition4_ratio(
    sup_increments: NDArray[np.float64],
    end_increments: NDArray[np.float64],
    pi: Partition | None = None,
) -> float:
    """Maximum over cells of E(sup increment) / E(endpoint increment)."""
    return condition4_diagnostic(sup_increments, end_increments, pi)[0]
