"""
Monte Carlo risk of the estimators and the histogram dominance comparison.

Replication r draws from the r-th child of SeedSequence(seed), so results do
not depend on how many workers run them.
"""

import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

from bathtub.config import get_settings
from bathtub.core.exceptions import UsageError
from bathtub.models.shape import EstimatorKind, ModelKind
from bathtub.models.stepfn import Partition, StepFunction
from bathtub.schemas.data import ObservedData
from bathtub.schemas.risk import EstimatorSpec, RiskReport, TruthSpec
from bathtub.services.estimators import cumulative_estimate, fit
from bathtub.services.geometry import l1_distance
from bathtub.services.histogram import (
    DEFAULT_CONSTANT,
    cell_increments,
    condition4_diagnostic,
    histogram_estimate,
)
from bathtub.services.regularize import shape_map
from bathtub.services.simulation import generate

logger = logging.getLogger(__name__)

T = TypeVar("T")

DOMINANCE_CELLS = (1, 2, 4, 8, 16, 32)
# Additive slack in the dominance ceiling C * A_hat + 8
DOMINANCE_SLACK = 8.0


def run_replications(
    task: Callable[[np.random.Generator], T],
    reps: int,
    seed: int = 0,
    workers: int | None = None,
) -> list[T]:
    """
    Run `task` once per replication on its own child stream.

    Args:
        task: Callable receiving a Generator
        reps: Number of replications
        seed: Root seed
        workers: Thread pool size; None uses the WORKERS setting

    Returns:
        Results in replication order
    """
    streams = np.random.SeedSequence(seed).spawn(reps)
    workers = get_settings().WORKERS if workers is None else workers

    def run(stream: np.random.SeedSequence) -> T:
        return task(np.random.default_rng(stream))

    if workers <= 1:
        return [run(s) for s in streams]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, streams))


def summarize(values: Sequence[float]) -> tuple[float, float]:
    """(mean, standard error) with compensated summation."""
    n = len(values)
    if n == 0:
        raise UsageError("Nothing to summarize")
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate_function(
    estimator: EstimatorSpec, data: ObservedData, truth: TruthSpec
) -> StepFunction:
    """Estimate of the truth's g from one data set."""
    model = truth.kind
    shape = estimator.shape or truth.shape or model.default_shape
    if estimator.kind is EstimatorKind.SHAPE:
        return fit(data, model, shape).f
    if estimator.kind is EstimatorKind.KNOWN_MODE:
        return fit(data, model, shape, estimator.mode).f
    G_hat = cumulative_estimate(data, model)
    if estimator.kind is EstimatorKind.HISTOGRAM:
        return histogram_estimate(G_hat, estimator.partition)  # type: ignore[arg-type]
    return histogram_estimate(G_hat, Partition.trivial(G_hat.domain))


def monte_carlo_risk(
    truth: TruthSpec,
    estimator: EstimatorSpec,
    size: float | None,
    reps: int,
    seed: int = 0,
    workers: int | None = None,
) -> RiskReport:
    """
    Mean L1 error of an estimator over independent replications.

    The nhpp error is the L1 distance divided by T; its report also carries the
    plain distance as the `plain_l1` and `plain_l1_stderr` metrics.

    Raises:
        UsageError: With fewer than 2 replications
    """
    if reps < 2:
        raise UsageError(f"Monte Carlo risk needs at least 2 replications, got {reps}")

    def replicate(rng: np.random.Generator) -> float:
        data = generate(truth, size, rng)
        f = estimate_function(estimator, data, truth)
        return l1_distance(f, truth.g)

    plain = run_replications(replicate, reps, seed, workers)
    errors = [e / truth.l1_normalizer for e in plain]
    mean, stderr = summarize(errors)
    metrics: dict[str, float] = {}
    if truth.kind is ModelKind.NHPP:
        plain_mean, plain_se = summarize(plain)
        metrics.update(plain_l1=plain_mean, plain_l1_stderr=plain_se)
    logger.info(
        f"{estimator.label} on {truth.label or truth.kind.value}: "
        f"risk {mean:.6g} +/- {stderr:.3g} over {reps} replications"
    )
    return RiskReport(
        name=estimator.label,
        mean_l1=mean,
        stderr=stderr,
        replications=reps,
        per_rep=tuple(errors),
        metrics=metrics,
    )


def histogram_dominance(
    truth: TruthSpec,
    size: float | None,
    reps: int,
    seed: int = 0,
    C: float = DEFAULT_CONSTANT,
    cells: Sequence[int] = DOMINANCE_CELLS,
    workers: int | None = None,
) -> RiskReport:
    """
    Compare the shape estimator's risk with the best equal-width histogram.

    The ratio must stay below C * A_hat + 8, where A_hat is the largest empirical
    sup/endpoint ratio among the partitions where it is finite.

    Raises:
        UsageError: With fewer than 2 replications
    """
    if reps < 2:
        raise UsageError(f"Dominance needs at least 2 replications, got {reps}")
    partitions = [Partition.uniform(truth.horizon, D) for D in cells]
    G = truth.G
    shape = truth.shape or truth.kind.default_shape

    def replicate(rng: np.random.Generator) -> tuple[float, list[float], list, list]:
        data = generate(truth, size, rng)
        G_hat = cumulative_estimate(data, truth.kind)
        shape_err = l1_distance(shape_map(G_hat, shape).f, truth.g) / truth.l1_normalizer
        hist_errs, sups, ends = [], [], []
        for pi in partitions:
            hist = histogram_estimate(G_hat, pi)
            hist_errs.append(l1_distance(hist, truth.g) / truth.l1_normalizer)
            s, e = cell_increments(G_hat, G, pi)
            sups.append(s)
            ends.append(e)
        return shape_err, hist_errs, sups, ends

    results = run_replications(replicate, reps, seed, workers)
    shape_errors = [r[0] for r in results]
    shape_risk, shape_se = summarize(shape_errors)

    metrics: dict[str, float] = {"shape_risk": shape_risk, "shape_stderr": shape_se}
    hist_risks: list[float] = []
    ratios: list[float] = []
    for j, pi in enumerate(partitions):
        risk, _ = summarize([r[1][j] for r in results])
        hist_risks.append(risk)
        metrics[f"histogram_risk_D{pi.size}"] = risk
        ratio, _, _ = condition4_diagnostic(
            np.array([r[2][j] for r in results]), np.array([r[3][j] for r in results]), pi
        )
        if math.isfinite(ratio):
            ratios.append(ratio)

    best = int(np.argmin(hist_risks))
    a_hat = max(ratios) if ratios else math.inf
    ceiling = C * a_hat + DOMINANCE_SLACK
    ratio = shape_risk / hist_risks[best] if hist_risks[best] > 0 else math.inf
    metrics.update(
        best_histogram_risk=hist_risks[best],
        best_cells=float(partitions[best].size),
        ratio=ratio,
        A_hat=a_hat,
        ceiling=ceiling,
    )

    rows: tuple[str, ...] = ()
    if not math.isfinite(ratio) or ratio > ceiling:
        rows = (f"{truth.label or truth.kind.value}: ratio {ratio!r} > ceiling {ceiling!r}",)
        logger.warning(rows[0])
    return RiskReport(
        name=f"dominance[{truth.label or truth.kind.value}]",
        mean_l1=shape_risk,
        stderr=shape_se,
        replications=reps,
        per_rep=tuple(shape_errors),
        violations=len(rows),
        metrics=metrics,
        violation_rows=rows,
    )


def default_size(truth: TruthSpec) -> float | None:
    """Sample size used when none is given: 500 records, or the truth's horizon for nhpp."""
    return None if truth.kind is ModelKind.NHPP else 500
