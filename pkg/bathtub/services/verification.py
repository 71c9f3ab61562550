"""
Randomized checks of the risk inequalities behind the estimators.

Deterministic suites evaluate an inequality (or identity) per random instance
and count the instances that miss it by more than the tolerance. Monte Carlo
suites compare an expectation with its bound using a 3 * stderr margin.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from bathtub.core.exceptions import UsageError
from bathtub.models.shape import ModelKind, ShapeKind, Suite
from bathtub.models.stepfn import Interval, Partition, PiecewiseAffine, StepFunction
from bathtub.schemas.risk import RiskReport, TruthSpec
from bathtub.services.estimators import constant_rate_mle, cumulative_estimate, ecdf
from bathtub.services.geometry import (
    cumulative,
    interval_stats,
    l1_distance,
    sup_difference,
    sup_distance,
)
from bathtub.services.histogram import (
    DEFAULT_CONSTANT,
    best_step_distance,
    cell_increments,
    condition4_diagnostic,
    histogram_estimate,
    risk_bracket,
)
from bathtub.services.regularize import regularize_at, shape_map, slope
from bathtub.services.risk import histogram_dominance, run_replications, summarize
from bathtub.services.simulation import (
    constant_rate_truth,
    default_truth,
    generate,
    random_censoring,
    random_truth,
)

logger = logging.getLogger(__name__)

# Violation rows kept per report
MAX_ROWS = 20
MARGIN = 3.0


@dataclass(frozen=True)
class Check:
    """One evaluated instance: lhs compared with rhs at tolerance tol."""

    lhs: float
    rhs: float
    tol: float
    equality: bool = False

    @property
    def excess(self) -> float:
        gap = self.lhs - self.rhs
        return abs(gap) if self.equality else gap

    @property
    def ok(self) -> bool:
        return bool(self.excess <= self.tol)


def _report(name: str, checks: Sequence[Check]) -> RiskReport:
    lhs = [c.lhs for c in checks]
    mean, stderr = summarize(lhs)
    rows = tuple(
        f"trial {i}: lhs={c.lhs!r} rhs={c.rhs!r} excess={c.excess!r} tol={c.tol!r}"
        for i, c in enumerate(checks)
        if not c.ok
    )
    if rows:
        logger.warning(f"{name}: {len(rows)} violation(s) in {len(checks)} trial(s)")
    return RiskReport(
        name=name,
        mean_l1=mean,
        stderr=stderr,
        replications=len(checks),
        per_rep=tuple(lhs),
        violations=len(rows),
        metrics={"max_excess": max(c.excess for c in checks), "trials": float(len(checks))},
        violation_rows=rows[:MAX_ROWS],
    )


def merge_reports(name: str, reports: Sequence[RiskReport]) -> RiskReport:
    """Combine sub-reports; metrics and rows are prefixed with the sub-report name."""
    metrics: dict[str, float] = {}
    rows: list[str] = []
    for r in reports:
        metrics[f"{r.name}.mean_l1"] = r.mean_l1
        metrics[f"{r.name}.stderr"] = r.stderr
        metrics[f"{r.name}.violations"] = float(r.violations)
        metrics.update({f"{r.name}.{k}": v for k, v in r.metrics.items()})
        rows.extend(f"{r.name}: {row}" for row in r.violation_rows)
    k = len(reports)
    return RiskReport(
        name=name,
        mean_l1=math.fsum(r.mean_l1 for r in reports) / k,
        stderr=math.sqrt(math.fsum(r.stderr**2 for r in reports)) / k,
        replications=sum(r.replications for r in reports),
        violations=sum(r.violations for r in reports),
        metrics=metrics,
        violation_rows=tuple(rows),
    )


# ===================
# Random instances
# ===================

def random_partition(rng: np.random.Generator, domain: Interval, max_cells: int = 8) -> Partition:
    """Partition with 1 to max_cells cells and interior points uniform in the domain."""
    cells = int(rng.integers(1, max_cells + 1))
    inner = np.unique(rng.uniform(domain.a, domain.b, cells - 1))
    inner = inner[(inner > domain.a + domain.tolerance) & (inner < domain.b - domain.tolerance)]
    return Partition(np.concatenate(([domain.a], inner, [domain.b])))


def random_subinterval(rng: np.random.Generator, domain: Interval) -> Interval:
    """Subinterval of length at least a thousandth of the domain."""
    while True:
        lo, hi = np.sort(rng.uniform(domain.a, domain.b, 2))
        if hi - lo >= 1e-3 * domain.length:
            return Interval(float(lo), float(hi))


def _random_nonincreasing(rng: np.random.Generator) -> StepFunction:
    domain = Interval(0.0, float(rng.uniform(0.5, 3.0)))
    count = int(rng.integers(1, 13))
    steps = np.sort(rng.choice(np.arange(1, 100), count - 1, replace=False))
    values = np.sort(rng.uniform(-5.0, 10.0, count))[::-1]
    return StepFunction(domain, steps * domain.length / 100, values)


def _random_data_truth(
    rng: np.random.Generator, model: ModelKind, shape: ShapeKind = ShapeKind.U_SHAPED
) -> tuple[TruthSpec, float | None]:
    """Random truth of the model together with a sample size for it."""
    truth = random_truth(model, rng, shape)
    if model is ModelKind.HAZARD:
        truth = truth.model_copy(update={"censor_dist": random_censoring(rng, truth.horizon)})
    size = None if model is ModelKind.NHPP else int(rng.integers(20, 301))
    return truth, size


# ===================
# Deterministic suites
# ===================

def check_oscillation(rng: np.random.Generator) -> Check:
    """
    Oscillation of a nonincreasing h over J equals twice the largest gap between
    its running integral and the chord with the mean slope.
    """
    h = _random_nonincreasing(rng)
    J = random_subinterval(rng, h.domain)
    mean, osc = interval_stats(h, J)
    H = cumulative(h)
    anchor = float(H.eval(J.a))
    chord = PiecewiseAffine.affine(
        h.domain,
        anchor + (h.domain.a - J.a) * mean,
        anchor + (h.domain.b - J.a) * mean,
    )
    rhs = 2.0 * sup_difference(H, chord, J)
    return Check(osc, rhs, 1e-10, equality=True)


def check_regularization_gap(rng: np.random.Generator) -> Check:
    """
    L1 gap between the slopes of the U-shaped regularizations at r < s equals twice
    the larger of sup (F - E_r) and sup (E_s - F) over [r, s].
    """
    truth = random_truth(ModelKind.DENSITY, rng, ShapeKind(rng.choice(["u_shaped", "unimodal"])))
    F = ecdf(generate(truth, int(rng.integers(5, 41)), rng))  # type: ignore[arg-type]
    J = random_subinterval(rng, F.domain)
    E_r, _ = regularize_at(F, J.a, ShapeKind.U_SHAPED)
    E_s, _ = regularize_at(F, J.b, ShapeKind.U_SHAPED)
    lhs = l1_distance(slope(E_r), slope(E_s))
    rhs = 2.0 * max(sup_difference(F, E_r, J), sup_difference(E_s, F, J))
    return Check(lhs, rhs, 1e-9, equality=True)


def check_marshall(rng: np.random.Generator) -> Check:
    """A U-shaped regularization at a valley point is no farther from G than F is."""
    truth = random_truth(ModelKind.DENSITY, rng, ShapeKind.U_SHAPED)
    g = truth.g
    edges = np.concatenate(([g.domain.a], g.breakpoints, [g.domain.b]))
    valley = int(np.argmin(g.values))
    m = float(rng.uniform(edges[valley], edges[valley + 1]))
    G = truth.G
    F = ecdf(generate(truth, int(rng.integers(5, 81)), rng))  # type: ignore[arg-type]
    E, _ = regularize_at(F, m, ShapeKind.U_SHAPED)
    tol = 1e-12 * max(1.0, float(G.values[-1]))
    return Check(sup_distance(G, E), sup_distance(G, F), tol)


def check_risk_bracket(rng: np.random.Generator, model: ModelKind, C: float) -> Check:
    """L1 error of the U-shaped estimate is within the bias + fluctuation bracket."""
    truth, size = _random_data_truth(rng, model)
    G_hat = cumulative_estimate(generate(truth, size, rng), model)
    pi = random_partition(rng, truth.horizon)
    f = shape_map(G_hat, ShapeKind.U_SHAPED).f
    bracket = risk_bracket(truth.g, truth.G, G_hat, pi, C)
    scale = max(1.0, float(np.max(np.abs(G_hat.values))), float(truth.G.values[-1]))
    return Check(l1_distance(f, truth.g), bracket.total, 1e-10 * scale)


def check_stability(rng: np.random.Generator, model: ModelKind) -> Check:
    """Known-valley and selected-valley estimates differ by at most 4 sup |G_hat - G|."""
    truth, size = _random_data_truth(rng, model)
    G_hat = cumulative_estimate(generate(truth, size, rng), model)
    known = shape_map(G_hat, ShapeKind.U_SHAPED, truth.mode).f
    selected = shape_map(G_hat, ShapeKind.U_SHAPED).f
    tol = 1e-10 * max(1.0, float(G_hat.values[-1]))
    return Check(l1_distance(known, selected), 4.0 * sup_distance(G_hat, truth.G), tol)


def check_histogram_sandwich(rng: np.random.Generator, model: ModelKind) -> tuple[Check, Check]:
    """
    sum |Z(t_k) - Z(t_{k-1})| <= ||histogram - g|| <= 2 d(g, steps) + sum of sup increments.
    """
    truth, size = _random_data_truth(rng, model)
    G_hat = cumulative_estimate(generate(truth, size, rng), model)
    pi = random_partition(rng, truth.horizon)
    error = l1_distance(histogram_estimate(G_hat, pi), truth.g)
    sups, ends = cell_increments(G_hat, truth.G, pi)
    lower = math.fsum(ends.tolist())
    upper = 2.0 * best_step_distance(truth.g, pi) + math.fsum(sups.tolist())
    tol = 1e-10 * max(1.0, float(np.max(np.abs(G_hat.values))), float(truth.G.values[-1]))
    return Check(lower, error, tol), Check(error, upper, tol)


def _trials(
    check: Callable[[np.random.Generator], Check], trials: int, seed: int
) -> list[Check]:
    return run_replications(check, trials, seed)


def _cycled(models: Sequence[ModelKind], make: Callable) -> Callable[[np.random.Generator], Check]:
    def check(rng: np.random.Generator) -> Check:
        return make(rng, models[int(rng.integers(len(models)))])

    return check


# ===================
# Monte Carlo bounds
# ===================

def check_constant_rate_mle(
    reps: int, seed: int = 0, rate: float = 5.0, horizon: float = 100.0
) -> RiskReport:
    """
    Mean normalized L1 error of the constant-rate MLE against sqrt(rate / T).

    The U-shaped estimate's error and its ratio to the MLE's are reported only.
    """
    truth = constant_rate_truth(rate, horizon)

    def replicate(rng: np.random.Generator) -> tuple[float, float]:
        log = generate(truth, None, rng)
        mle = abs(constant_rate_mle(log) - rate)  # type: ignore[arg-type]
        shaped = shape_map(cumulative_estimate(log, ModelKind.NHPP), ShapeKind.U_SHAPED).f
        return mle, l1_distance(shaped, truth.g) / horizon

    results = run_replications(replicate, max(reps, 2), seed)
    mle_mean, mle_se = summarize([r[0] for r in results])
    shape_mean, shape_se = summarize([r[1] for r in results])
    bound = math.sqrt(rate / horizon)
    ok = mle_mean <= bound + MARGIN * mle_se
    rows = () if ok else (f"mle risk {mle_mean!r} > {bound!r} + 3 * {mle_se!r}",)
    return RiskReport(
        name="constant_rate_mle",
        mean_l1=mle_mean,
        stderr=mle_se,
        replications=len(results),
        violations=len(rows),
        metrics={
            "bound": bound,
            "shape_risk": shape_mean,
            "shape_stderr": shape_se,
            "shape_to_mle": shape_mean / mle_mean if mle_mean > 0 else math.inf,
        },
        violation_rows=rows,
    )


def _nhpp_increments(
    reps: int, seed: int, rate: float, horizon: float, cells: int
) -> tuple[np.ndarray, np.ndarray, Partition]:
    truth = constant_rate_truth(rate, horizon)
    pi = Partition.uniform(truth.horizon, cells)
    G = truth.G

    def replicate(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        N = cumulative_estimate(generate(truth, None, rng), ModelKind.NHPP)
        return cell_increments(N, G, pi)

    results = run_replications(replicate, max(reps, 2), seed)
    return np.array([r[0] for r in results]), np.array([r[1] for r in results]), pi


def check_condition4(
    reps: int, seed: int = 0, rate: float = 5.0, horizon: float = 100.0, cells: int = 4
) -> RiskReport:
    """Per-cell E(sup increment) / E(endpoint increment) of a Poisson path is at most 8."""
    sups, ends, pi = _nhpp_increments(reps, seed, rate, horizon, cells)
    ratio, stderr, ratios = condition4_diagnostic(sups, ends, pi)
    ok = ratio <= 8.0 + MARGIN * stderr
    rows = () if ok else (f"sup/endpoint ratio {ratio!r} > 8 + 3 * {stderr!r}",)
    metrics = {f"ratio_cell{k}": float(r) for k, r in enumerate(ratios)}
    metrics["bound"] = 8.0
    return RiskReport(
        name="condition4",
        mean_l1=ratio,
        stderr=stderr,
        replications=sups.shape[0],
        violations=len(rows),
        metrics=metrics,
        violation_rows=rows,
    )


def check_nhpp_fluctuation(
    reps: int, seed: int = 0, rate: float = 5.0, horizon: float = 100.0, cells: int = 4
) -> RiskReport:
    """(1/T) * sum_k E sup increment <= 2 sqrt(D/T) sqrt(G(T)/T)."""
    sups, _, pi = _nhpp_increments(reps, seed, rate, horizon, cells)
    totals = (sups.sum(axis=1) / horizon).tolist()
    mean, stderr = summarize(totals)
    bound = 2.0 * math.sqrt(pi.size / horizon) * math.sqrt(rate * horizon / horizon)
    ok = mean <= bound + MARGIN * stderr
    rows = () if ok else (f"fluctuation {mean!r} > {bound!r} + 3 * {stderr!r}",)
    return RiskReport(
        name="nhpp_fluctuation",
        mean_l1=mean,
        stderr=stderr,
        replications=len(totals),
        violations=len(rows),
        metrics={"bound": bound},
        violation_rows=rows,
    )


def check_density_cells(
    reps: int, seed: int = 0, size: int = 200, cells: int = 8
) -> RiskReport:
    """Per-cell E sup increment of the empirical process <= min{2p, (1 + sqrt(pi/2)) sqrt(p/n)}."""
    truth = default_truth(ModelKind.DENSITY)
    pi = Partition.uniform(truth.horizon, cells)
    G = truth.G

    def replicate(rng: np.random.Generator) -> np.ndarray:
        F = cumulative_estimate(generate(truth, size, rng), ModelKind.DENSITY)
        return cell_increments(F, G, pi)[0]

    sups = np.array(run_replications(replicate, max(reps, 2), seed))
    masses = np.diff(G.eval(pi.endpoints))
    bounds = np.minimum(2.0 * masses, (1.0 + math.sqrt(math.pi / 2)) * np.sqrt(masses / size))
    metrics: dict[str, float] = {}
    rows = []
    for k in range(pi.size):
        mean, stderr = summarize(sups[:, k].tolist())
        metrics[f"cell{k}.mean"] = mean
        metrics[f"cell{k}.bound"] = float(bounds[k])
        if mean > bounds[k] + MARGIN * stderr:
            rows.append(f"cell {k}: {mean!r} > {float(bounds[k])!r} + 3 * {stderr!r}")
    overall, overall_se = summarize(sups.sum(axis=1).tolist())
    return RiskReport(
        name="density_cells",
        mean_l1=overall,
        stderr=overall_se,
        replications=sups.shape[0],
        violations=len(rows),
        metrics=metrics,
        violation_rows=tuple(rows),
    )


def _rate_bounds(trials: int, seed: int) -> RiskReport:
    seeds = np.random.SeedSequence(seed).generate_state(4)
    return merge_reports(
        Suite.RATE_BOUNDS.value,
        [
            check_constant_rate_mle(trials, int(seeds[0])),
            check_condition4(trials, int(seeds[1])),
            check_nhpp_fluctuation(trials, int(seeds[2])),
            check_density_cells(trials, int(seeds[3])),
        ],
    )


def _dominance(trials: int, seed: int, C: float) -> RiskReport:
    reports = []
    rng = np.random.default_rng(seed)
    for model in ModelKind:
        truths = [default_truth(model)]
        truths += [random_truth(model, rng, ShapeKind.U_SHAPED) for _ in range(2)]
        for truth in truths:
            size = None if model is ModelKind.NHPP else 500
            reports.append(
                histogram_dominance(truth, size, max(trials, 2), int(rng.integers(2**31)), C)
            )
    return merge_reports(Suite.DOMINANCE.value, reports)


# ===================
# Entry point
# ===================

_EVERY_SUITE = (
    Suite.RISK_BRACKET,
    Suite.STABILITY,
    Suite.OSCILLATION,
    Suite.REGULARIZATION_GAP,
    Suite.MARSHALL,
    Suite.HISTOGRAM_SANDWICH,
    Suite.RATE_BOUNDS,
)


def verify_inequalities(
    suite: Suite | str,
    trials: int,
    seed: int = 0,
    C: float = DEFAULT_CONSTANT,
) -> RiskReport:
    """
    Run one verification suite.

    Args:
        suite: Suite name; `all` runs every suite except the heavier `dominance`
        trials: Random instances (or Monte Carlo replications) per check
        seed: Root seed; the report is reproducible from it
        C: Bracket constant for the risk bracket and dominance suites

    Returns:
        RiskReport whose `violations` counts failed instances

    Raises:
        UsageError: If trials < 1
    """
    suite = Suite(suite)
    if trials < 1:
        raise UsageError(f"trials must be at least 1, got {trials}")
    logger.info(f"Verifying {suite.value} with {trials} trial(s), seed {seed}")

    if suite is Suite.ALL:
        seeds = np.random.SeedSequence(seed).generate_state(len(_EVERY_SUITE))
        return merge_reports(
            suite.value,
            [verify_inequalities(s, trials, int(sd), C) for s, sd in zip(_EVERY_SUITE, seeds)],
        )
    if suite is Suite.OSCILLATION:
        return _report(suite.value, _trials(check_oscillation, trials, seed))
    if suite is Suite.REGULARIZATION_GAP:
        return _report(suite.value, _trials(check_regularization_gap, trials, seed))
    if suite is Suite.MARSHALL:
        return _report(suite.value, _trials(check_marshall, trials, seed))
    if suite is Suite.RISK_BRACKET:
        make = _cycled(tuple(ModelKind), lambda rng, model: check_risk_bracket(rng, model, C))
        return _report(suite.value, _trials(make, trials, seed))
    if suite is Suite.STABILITY:
        models = (ModelKind.NHPP, ModelKind.HAZARD, ModelKind.DENSITY)
        return _report(suite.value, _trials(_cycled(models, check_stability), trials, seed))
    if suite is Suite.HISTOGRAM_SANDWICH:
        pairs = run_replications(_cycled(tuple(ModelKind), check_histogram_sandwich), trials, seed)
        return merge_reports(
            suite.value,
            [_report("lower", [p[0] for p in pairs]), _report("upper", [p[1] for p in pairs])],
        )
    if suite is Suite.RATE_BOUNDS:
        return _rate_bounds(trials, seed)
    return _dominance(trials, seed, C)
