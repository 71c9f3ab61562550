"""
Cumulative estimates built from raw observations, and the shape-respecting fit
that feeds them through the regularization machinery.

- density:    empirical distribution function of an i.i.d. sample
- regression: cumulative regression process (1/n) * sum of y_i 1{x_i <= t}
- hazard:     Nelson-Aalen cumulative hazard of right-censored life data
- nhpp:       counting path N(t) of a failure-time log
"""

import logging

import numpy as np

from bathtub.core.exceptions import DomainError, UsageError
from bathtub.models.shape import ModelKind, MonotoneFlag, ShapeKind
from bathtub.models.stepfn import Interval, StepFunction
from bathtub.schemas.data import CensoredSample, EventLog, ObservedData, RegressionData, Sample
from bathtub.schemas.estimate import ShapeEstimate
from bathtub.services.regularize import shape_map

logger = logging.getLogger(__name__)

_DATA_TYPES: dict[ModelKind, type] = {
    ModelKind.DENSITY: Sample,
    ModelKind.REGRESSION: RegressionData,
    ModelKind.HAZARD: CensoredSample,
    ModelKind.NHPP: EventLog,
}


def _cumulative_counts(
    domain: Interval, points: np.ndarray, masses: np.ndarray, monotone: MonotoneFlag
) -> StepFunction:
    """Step function jumping by masses[i] at points[i]; earlier points fold into the start."""
    order = np.argsort(points, kind="stable")
    points, masses = points[order], masses[order]
    uniq, inverse = np.unique(points, return_inverse=True)
    totals = np.bincount(inverse, weights=masses, minlength=uniq.size)
    inside = uniq > domain.a
    start = float(totals[~inside].sum())
    running = start + np.cumsum(totals[inside])
    return StepFunction(domain, uniq[inside], np.concatenate(([start], running)), monotone)


def ecdf(s: Sample) -> StepFunction:
    """
    Empirical distribution function of a sample.

    Raises:
        DomainError: If the sample is empty
    """
    n = s.size
    if n == 0:
        raise DomainError("Cannot build an empirical distribution from an empty sample")
    uniq, counts = np.unique(s.values, return_counts=True)
    inside = uniq > s.domain.a
    start = int(counts[~inside].sum())
    cumulative_counts = start + np.cumsum(counts[inside])
    values = np.concatenate(([start], cumulative_counts)) / n
    return StepFunction(s.domain, uniq[inside], values, MonotoneFlag.NONDECREASING)


def cumulative_regression(d: RegressionData) -> StepFunction:
    """
    Cumulative regression process with a jump of y_i/n at each design point.

    The result is not monotone in general.

    Raises:
        DomainError: If there are no observations
    """
    n = d.size
    if n == 0:
        raise DomainError("Cannot build a regression process from empty data")
    return _cumulative_counts(d.domain, d.x, d.y / n, MonotoneFlag.NONE)


def _risk_table(cs: CensoredSample) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct death times inside (0, c] with death counts and at-risk counts."""
    x = np.sort(cs.times)
    dead = np.sort(cs.times[cs.delta == 1])
    death_times, deaths = np.unique(dead, return_counts=True)
    keep = death_times <= cs.horizon
    death_times, deaths = death_times[keep], deaths[keep]
    # ties: deaths come before censorings, so Y counts everyone with x >= t
    at_risk = x.size - np.searchsorted(x, death_times, side="left")
    return death_times, deaths, at_risk


def kaplan_meier(cs: CensoredSample) -> StepFunction:
    """
    Product-limit estimate of the lifetime distribution function on [0, c].

    Raises:
        DomainError: If there are no records
    """
    if cs.size == 0:
        raise DomainError("Cannot build a product-limit estimate from no records")
    death_times, deaths, at_risk = _risk_table(cs)
    survival = np.cumprod(1.0 - deaths / at_risk)
    return _step_from_jumps(cs.domain, death_times, 1.0 - survival)


def _step_from_jumps(domain: Interval, times: np.ndarray, levels: np.ndarray) -> StepFunction:
    inside = times > domain.a
    start = float(levels[~inside][-1]) if np.any(~inside) else 0.0
    return StepFunction(
        domain,
        times[inside],
        np.concatenate(([start], levels[inside])),
        MonotoneFlag.NONDECREASING,
    )


def nelson_aalen(cs: CensoredSample) -> StepFunction:
    """
    Nelson-Aalen cumulative hazard on [0, c]: increment d/Y at each death time.

    Assumes censoring independent of the lifetimes and some lifetimes outlasting c.
    Neither can be checked from the records; only the second gets a warning.

    Raises:
        DomainError: If there are no records
    """
    if cs.size == 0:
        raise DomainError("Cannot build a cumulative hazard from no records")
    death_times, deaths, at_risk = _risk_table(cs)
    empty = at_risk == 0
    if np.any(empty):
        logger.warning(f"Skipping {int(empty.sum())} increment(s) with an empty risk set")
        death_times, deaths, at_risk = death_times[~empty], deaths[~empty], at_risk[~empty]
    if not np.any(cs.times >= cs.horizon):
        logger.warning(
            f"No subject is at risk at the horizon c={cs.horizon}; "
            "the requirement that some lifetimes outlast c looks violated"
        )
    return _step_from_jumps(cs.domain, death_times, np.cumsum(deaths / at_risk))


def hazard_integral(F_hat: StepFunction) -> StepFunction:
    """
    Cumulative hazard as the integral of dF / (1 - F(s-)) for a distribution estimate.

    Jumps where 1 - F(s-) vanishes are skipped with a warning.
    """
    before = F_hat.values[:-1]
    jumps = F_hat.jumps
    survivors = 1.0 - before
    empty = survivors <= 0
    if np.any(empty & (jumps != 0)):
        logger.warning("Skipping distribution jumps with no remaining mass")
    increments = np.where(empty, 0.0, jumps / np.where(empty, 1.0, survivors))
    # an atom at the left endpoint is divided by the full initial mass
    start = float(F_hat.values[0])
    return StepFunction(
        F_hat.domain,
        F_hat.breakpoints,
        np.concatenate(([start], start + np.cumsum(increments))),
        MonotoneFlag.NONDECREASING,
    )


def nhpp_counting(e: EventLog) -> StepFunction:
    """Counting path N(t) on [0, T] with a unit jump at each event time."""
    counts = np.arange(e.count + 1, dtype=float)
    return StepFunction(e.domain, e.times, counts, MonotoneFlag.NONDECREASING)


def constant_rate_mle(e: EventLog) -> float:
    """Maximum likelihood rate N(T)/T of a homogeneous process."""
    return e.count / e.horizon


def _check_model(data: ObservedData, model: ModelKind) -> None:
    expected = _DATA_TYPES[model]
    if not isinstance(data, expected):
        raise UsageError(
            f"Model '{model.value}' expects {expected.__name__}, got {type(data).__name__}"
        )


def cumulative_estimate(data: ObservedData, model: ModelKind | str) -> StepFunction:
    """
    Cumulative estimate G_hat for the given model.

    Raises:
        UsageError: If the data container does not match the model
    """
    model = ModelKind(model)
    _check_model(data, model)
    if model is ModelKind.DENSITY:
        return ecdf(data)  # type: ignore[arg-type]
    if model is ModelKind.REGRESSION:
        deviation = data.design_deviation()  # type: ignore[union-attr]
        if deviation > 1e-9:
            logger.warning(
                f"Regression design deviates from the uniform grid i/n by up to {deviation:.3g}"
            )
        else:
            logger.debug("Regression design is the uniform grid i/n")
        return cumulative_regression(data)  # type: ignore[arg-type]
    if model is ModelKind.HAZARD:
        return nelson_aalen(data)  # type: ignore[arg-type]
    return nhpp_counting(data)  # type: ignore[arg-type]


def fit(
    data: ObservedData,
    model: ModelKind | str,
    shape: ShapeKind | str | None = None,
    mode: float | None = None,
) -> ShapeEstimate:
    """
    Shape-respecting estimate of a density, regression function, hazard rate or
    failure rate.

    Args:
        data: Observations matching the model
        model: Observation scheme
        shape: Shape kind; defaults to unimodal (density, regression) or
            U-shaped (hazard, nhpp)
        mode: Optional known mode / valley

    Returns:
        ShapeEstimate tagged with the model; for nhpp the L1 normalizer is T

    Raises:
        UsageError: If the data container does not match the model
    """
    model = ModelKind(model)
    shape = model.default_shape if shape is None else ShapeKind(shape)
    G_hat = cumulative_estimate(data, model)
    estimate = shape_map(G_hat, shape, mode)
    normalizer = data.horizon if isinstance(data, EventLog) else 1.0
    logger.info(
        f"Fitted {shape.value} {model.value} estimate on {G_hat.domain} "
        f"(mode={estimate.mode:.6g}, d={estimate.min_value:.6g})"
    )
    return estimate.model_copy(update={"model": model, "l1_normalizer": normalizer})
