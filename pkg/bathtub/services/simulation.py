"""
Ground truths and data generators for the Monte Carlo harness.

Every generator is deterministic given its seed: pass an int, a
numpy SeedSequence or a Generator.
"""

import logging

import numpy as np

from bathtub.core.exceptions import DomainError, UsageError
from bathtub.models.shape import ModelKind, ShapeKind
from bathtub.models.stepfn import Interval, Partition, PiecewiseAffine, StepFunction
from bathtub.schemas.data import CensoredSample, EventLog, ObservedData, RegressionData, Sample
from bathtub.schemas.risk import TruthSpec
from bathtub.services.geometry import integral

logger = logging.getLogger(__name__)

SeedLike = int | np.random.SeedSequence | np.random.Generator

DEFAULT_HORIZONS = {
    ModelKind.DENSITY: (0.0, 1.0),
    ModelKind.REGRESSION: (0.0, 1.0),
    ModelKind.HAZARD: (0.0, 1.0),
    ModelKind.NHPP: (0.0, 20.0),
}
# Random truths put breakpoints on this many equal steps of the horizon
BREAKPOINT_GRID = 100


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ===================
# Truths
# ===================

def _shaped_values(
    rng: np.random.Generator, pieces: int, shape: ShapeKind, low: float, high: float
) -> tuple[np.ndarray, int]:
    """Random cell values respecting the shape, plus the index of the extreme cell."""
    values = rng.uniform(low, high, pieces)
    if shape is ShapeKind.NONINCREASING:
        return np.sort(values)[::-1].copy(), pieces - 1
    if shape is ShapeKind.NONDECREASING:
        return np.sort(values), 0
    pivot = int(rng.integers(pieces))
    u_shaped = shape is ShapeKind.U_SHAPED
    extreme = int(np.argmin(values) if u_shaped else np.argmax(values))
    rest = np.delete(values, extreme)
    left, right = np.sort(rest[:pivot]), np.sort(rest[pivot:])
    if u_shaped:
        left = left[::-1]
    else:
        right = right[::-1]
    return np.concatenate((left, [values[extreme]], right)), pivot


def random_truth(
    kind: ModelKind | str,
    seed: SeedLike,
    shape: ShapeKind | str = ShapeKind.U_SHAPED,
    horizon: Interval | None = None,
    pieces: tuple[int, int] = (3, 12),
    sigma: float = 1.0,
) -> TruthSpec:
    """
    Random piecewise-constant truth with 3 to 12 pieces and values in [0, 10].

    Densities are rescaled to integrate to 1. The recorded mode is the midpoint
    of the extreme (valley or peak) cell.
    """
    kind, shape = ModelKind(kind), ShapeKind(shape)
    rng = as_generator(seed)
    if horizon is None:
        horizon = Interval(*DEFAULT_HORIZONS[kind])
    count = int(rng.integers(pieces[0], pieces[1] + 1))
    steps = np.sort(rng.choice(np.arange(1, BREAKPOINT_GRID), count - 1, replace=False))
    breakpoints = horizon.a + steps * (horizon.length / BREAKPOINT_GRID)
    values, extreme = _shaped_values(rng, count, shape, 0.0, 10.0)
    if kind is ModelKind.DENSITY:
        values = np.maximum(values, 1e-3)
        g = StepFunction(horizon, breakpoints, values)
        values = values / integral(g)
    g = StepFunction(horizon, breakpoints, values)
    edges = np.concatenate(([horizon.a], breakpoints, [horizon.b]))
    mode = 0.5 * (edges[extreme] + edges[extreme + 1])
    if shape is ShapeKind.NONINCREASING:
        mode = horizon.b
    elif shape is ShapeKind.NONDECREASING:
        mode = horizon.a
    return TruthSpec(
        kind=kind,
        g=g,
        horizon=horizon,
        sigma=sigma if kind is ModelKind.REGRESSION else 0.0,
        shape=shape,
        mode=mode,
        label=f"random-{shape.value}-{count}",
    )


def random_censoring(seed: SeedLike, horizon: Interval) -> PiecewiseAffine:
    """Continuous censoring distribution putting mass q in [0.2, 0.8] uniformly on [0, c]."""
    q = float(as_generator(seed).uniform(0.2, 0.8))
    return PiecewiseAffine.affine(horizon, 0.0, q)


def _piecewise_truth(
    kind: ModelKind, horizon: Interval, values: list[float], shape: ShapeKind, **extra
) -> TruthSpec:
    pi = Partition.uniform(horizon, len(values))
    return TruthSpec(
        kind=kind,
        g=StepFunction(horizon, pi.endpoints[1:-1], values),
        horizon=horizon,
        shape=shape,
        mode=horizon.midpoint,
        **extra,
    )


def default_truth(kind: ModelKind | str, horizon: float | None = None) -> TruthSpec:
    """
    Preset truths used by `simulate` when no truth file is given.

    density: 5-piece unimodal density on [0, 1]; regression: 5-piece unimodal
    function with unit noise; hazard: bathtub hazard on [0, 2]; nhpp: bathtub
    failure rate on [0, 100]. `horizon` moves the hazard or nhpp truth to [0, horizon].
    """
    kind = ModelKind(kind)
    if horizon is not None and not kind.anchored_at_zero:
        raise UsageError(f"The {kind.value} preset has a fixed interval")
    if kind is ModelKind.DENSITY:
        return _piecewise_truth(
            kind, Interval(0.0, 1.0), [0.5, 1.0, 2.0, 1.0, 0.5], ShapeKind.UNIMODAL,
            label="default-density",
        )
    if kind is ModelKind.REGRESSION:
        return _piecewise_truth(
            kind, Interval(0.0, 1.0), [1.0, 2.0, 4.0, 2.0, 1.0], ShapeKind.UNIMODAL,
            sigma=1.0, label="default-regression",
        )
    if kind is ModelKind.HAZARD:
        return _piecewise_truth(
            kind, Interval(0.0, horizon or 2.0), [2.0, 1.0, 0.5, 1.0, 2.0], ShapeKind.U_SHAPED,
            label="default-hazard",
        )
    return _piecewise_truth(
        kind, Interval(0.0, horizon or 100.0), [8.0, 4.0, 2.0, 4.0, 8.0], ShapeKind.U_SHAPED,
        label="default-nhpp",
    )


def constant_rate_truth(rate: float, horizon: float) -> TruthSpec:
    """Homogeneous process with rate `rate` on [0, horizon]."""
    domain = Interval(0.0, horizon)
    return TruthSpec(
        kind=ModelKind.NHPP,
        g=StepFunction.constant(domain, rate),
        horizon=domain,
        shape=ShapeKind.U_SHAPED,
        mode=domain.midpoint,
        label=f"constant-{rate!r}",
    )


# ===================
# Generators
# ===================

def _invert(knots: np.ndarray, levels: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse of a continuous nondecreasing piecewise-linear map at levels u."""
    idx = np.clip(np.searchsorted(levels, u, side="right") - 1, 0, knots.size - 2)
    lo, span = levels[idx], levels[idx + 1] - levels[idx]
    theta = np.where(span > 0, (u - lo) / np.where(span > 0, span, 1.0), 0.0)
    return knots[idx] + np.clip(theta, 0.0, 1.0) * (knots[idx + 1] - knots[idx])


def _sample_density(spec: TruthSpec, n: int, rng: np.random.Generator) -> Sample:
    G = spec.G
    total = float(G.values[-1])
    if total <= 0:
        raise DomainError("Cannot sample from a density with no mass")
    x = _invert(G.knots, G.values, rng.random(n) * total)
    return Sample(values=np.clip(x, spec.horizon.a, spec.horizon.b), domain=spec.horizon)


def _sample_regression(spec: TruthSpec, n: int, rng: np.random.Generator) -> RegressionData:
    x = np.arange(1, n + 1) / n
    noise = rng.standard_normal(n)
    return RegressionData(x=x, y=spec.g.eval(x) + spec.sigma * noise)


def _censoring_times(spec: TruthSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    H = spec.censor_dist
    if H is None:
        return np.full(n, np.inf)
    v = rng.random(n)
    if isinstance(H, StepFunction):
        j = np.searchsorted(H.values, v, side="left")
        starts = np.concatenate(([H.domain.a], H.breakpoints, [np.inf]))
        return starts[j]
    top = float(H.values[-1])
    out = _invert(H.knots, H.values, np.minimum(v, top))
    return np.where(v > top, np.inf, out)


def _sample_hazard(spec: TruthSpec, n: int, rng: np.random.Generator) -> CensoredSample:
    Lam = spec.G
    c = spec.horizon.b
    exposure = rng.exponential(size=n)
    total = float(Lam.values[-1])
    inside = _invert(Lam.knots, Lam.values, np.minimum(exposure, total))
    tail_rate = float(spec.g.values[-1])
    with np.errstate(divide="ignore"):
        beyond = c + (exposure - total) / tail_rate if tail_rate > 0 else np.full(n, np.inf)
    lifetimes = np.where(exposure <= total, inside, beyond)
    censors = _censoring_times(spec, n, rng)
    observed = np.minimum(np.minimum(lifetimes, censors), c)
    delta = ((lifetimes <= censors) & (lifetimes <= c)).astype(np.int64)
    return CensoredSample(times=observed, delta=delta, horizon=c)


def _sample_nhpp(spec: TruthSpec, rng: np.random.Generator) -> EventLog:
    T = spec.horizon.b
    ceiling = spec.M
    if ceiling <= 0:
        return EventLog(times=[], horizon=T)
    candidates = np.sort(rng.uniform(0.0, T, rng.poisson(ceiling * T)))
    accepted = candidates[rng.random(candidates.size) * ceiling < spec.g.eval(candidates)]
    return EventLog(times=np.unique(accepted[accepted > 0]), horizon=T)


def generate(spec: TruthSpec, size: float | None = None, seed: SeedLike = 0) -> ObservedData:
    """
    Draw one data set from a truth.

    Args:
        spec: Ground truth
        size: Sample size n (density, regression, hazard). For nhpp the horizon T
            is fixed by the truth; `size` may be omitted or must equal it.
        seed: Seed, SeedSequence or Generator

    Returns:
        Sample, RegressionData, CensoredSample or EventLog

    Raises:
        UsageError: If the size is missing or inconsistent with the truth
    """
    rng = as_generator(seed)
    if spec.kind is ModelKind.NHPP:
        if size is not None and abs(float(size) - spec.horizon.b) > spec.horizon.tolerance:
            raise UsageError(
                f"The nhpp horizon is fixed by the truth at T={spec.horizon.b}, got {size}"
            )
        return _sample_nhpp(spec, rng)
    if size is None or int(size) < 1:
        raise UsageError(f"A positive sample size is required for {spec.kind.value}")
    n = int(size)
    if spec.kind is ModelKind.DENSITY:
        return _sample_density(spec, n, rng)
    if spec.kind is ModelKind.REGRESSION:
        return _sample_regression(spec, n, rng)
    return _sample_hazard(spec, n, rng)
