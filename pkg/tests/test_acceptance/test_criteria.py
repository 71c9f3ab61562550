"""
Acceptance-scale runs: oracle comparisons and full verification suites.

Run with `pytest -m slow`; the fast suite skips them with `-m "not slow"`.
"""

import math

import numpy as np
import pytest

from bathtub.models.shape import Direction, ModelKind, ShapeKind, Suite
from bathtub.models.stepfn import Interval, StepFunction
from bathtub.schemas.data import Sample
from bathtub.schemas.risk import EstimatorSpec
from bathtub.services.estimators import fit
from bathtub.services.geometry import cumulative
from bathtub.services.regularize import concave_majorant, mode_profile, pava, select_mode, slope
from bathtub.services.risk import monte_carlo_risk
from bathtub.services.simulation import default_truth
from bathtub.services.verification import (
    check_condition4,
    check_constant_rate_mle,
    verify_inequalities,
)
from tests.helpers import hull_slopes_at

pytestmark = pytest.mark.slow


class TestOracles:
    """Estimates against independent brute-force computations."""

    def test_grenander_matches_brute_force_hull(self):
        """Nonincreasing density fit is the slope of the upper hull of the ECDF corners."""
        unit = Interval(0.0, 1.0)
        for seed in range(50):
            rng = np.random.default_rng(seed)
            # density 2 (1 - x) by inversion
            x = np.sort(1.0 - np.sqrt(rng.uniform(size=200)))
            sample = Sample(values=x, domain=unit)
            estimate = fit(sample, ModelKind.DENSITY, ShapeKind.NONINCREASING)
            corners_x = np.concatenate(([0.0], x, [1.0]))
            corners_y = np.concatenate(([0.0], np.arange(1, x.size + 1) / x.size, [1.0]))
            probes = 0.5 * (corners_x[:-1] + corners_x[1:])
            expected = hull_slopes_at(corners_x, corners_y, probes)
            assert np.max(np.abs(estimate.f.eval(probes) - expected)) <= 1e-10

    def test_majorant_slope_is_pava(self):
        """Slope of the majorant of a running integral is the weighted PAVA of the steps."""
        unit = Interval(0.0, 1.0)
        rng = np.random.default_rng(7)
        for _ in range(200):
            count = int(rng.integers(1, 16))
            steps = np.sort(rng.choice(np.arange(1, 100), count - 1, replace=False)) / 100
            h = StepFunction(unit, steps, rng.uniform(-5.0, 10.0, count))
            starts, widths, values = h.cells()
            expected = pava(values, widths, Direction.NONINCREASING)
            got = slope(concave_majorant(cumulative(h))).eval(starts + widths / 2)
            assert np.max(np.abs(got - expected)) <= 1e-12

    def test_unimodal_selection_matches_dense_grid(self):
        """Selected unimodal error is the grid minimum on random 20-jump cumulatives."""
        unit = Interval(0.0, 1.0)
        grid = np.linspace(0.0, 1.0, 2001)
        rng = np.random.default_rng(31)
        for _ in range(60):
            jumps = np.sort(rng.uniform(0.02, 0.98, 20))
            levels = np.concatenate(([0.0], np.cumsum(rng.exponential(size=20))))
            F = StepFunction(unit, jumps, levels)
            best = float(np.min(mode_profile(F, ShapeKind.UNIMODAL, grid)))
            assert select_mode(F, ShapeKind.UNIMODAL).min_value <= best + 1e-9


class TestVerificationSuites:
    """Every suite runs clean at acceptance scale."""

    @pytest.mark.parametrize(
        "suite,trials",
        [
            (Suite.OSCILLATION, 1000),
            (Suite.REGULARIZATION_GAP, 500),
            (Suite.MARSHALL, 1000),
            (Suite.RISK_BRACKET, 500),
            (Suite.STABILITY, 500),
            (Suite.HISTOGRAM_SANDWICH, 500),
        ],
    )
    def test_suite_has_no_violations(self, suite, trials):
        """Zero violations."""
        report = verify_inequalities(suite, trials, seed=2024)
        assert report.violations == 0, report.violation_rows

    def test_constant_rate_mle(self):
        """Mean normalized error of N(T)/T is within sqrt(rate / T)."""
        report = check_constant_rate_mle(500, seed=1)
        assert report.passed
        assert report.metrics["bound"] == pytest.approx(math.sqrt(0.05))
        assert math.isfinite(report.metrics["shape_to_mle"])

    def test_poisson_increment_ratio(self):
        """Sup over endpoint increments of a Poisson path stays below 8."""
        report = check_condition4(10_000, seed=3)
        assert report.passed
        assert report.replications == 10_000

    def test_dominance(self):
        """Risk ratios against the best histogram are finite and under their ceilings."""
        report = verify_inequalities(Suite.DOMINANCE, 40, seed=5)
        ratios = {k: v for k, v in report.metrics.items() if k.endswith(".ratio")}
        assert len(ratios) >= len(ModelKind)
        assert all(math.isfinite(v) for v in ratios.values())
        assert report.passed


def test_density_risk_decreases_with_n():
    """Risk at n = 500, 2000, 8000 falls by more than three standard errors each time."""
    truth = default_truth(ModelKind.DENSITY)
    spec = EstimatorSpec.shape_pipeline()
    reports = [monte_carlo_risk(truth, spec, n, reps=200, seed=10) for n in (500, 2000, 8000)]
    for bigger, smaller in zip(reports, reports[1:]):
        assert bigger.mean_l1 - 3 * bigger.stderr > smaller.mean_l1 + 3 * smaller.stderr
