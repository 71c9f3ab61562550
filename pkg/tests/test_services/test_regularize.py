"""
Tests for PAVA, hulls, regularization at a point, mode selection and the shape map.
"""

import numpy as np
import pytest

from bathtub.core.exceptions import DomainError
from bathtub.models.shape import Direction, ShapeKind
from bathtub.models.stepfn import Interval, PiecewiseAffine, Side, StepFunction
from bathtub.schemas.data import Sample
from bathtub.services.estimators import ecdf
from bathtub.services.geometry import cumulative, l1_distance, sup_distance
from bathtub.services.regularize import (
    concave_majorant,
    convex_minorant,
    mode_profile,
    pava,
    regularize_at,
    select_mode,
    shape_map,
    slope,
)
from tests.helpers import isotonic_minmax, upper_hull


class TestPava:
    """Tests for pava."""

    def test_nonincreasing(self):
        """Violators are pooled into their weighted mean."""
        np.testing.assert_allclose(pava([3.0, 1.0, 2.0]), [3.0, 1.5, 1.5])

    def test_nondecreasing(self):
        """Increasing direction pools the whole sequence here."""
        np.testing.assert_allclose(
            pava([3.0, 1.0, 2.0], direction=Direction.NONDECREASING), [2.0, 2.0, 2.0]
        )

    def test_weighted_matches_minmax_formula(self, rng):
        """Agrees with the exhaustive min-max formula on random input."""
        for _ in range(20):
            n = int(rng.integers(1, 9))
            y, w = rng.normal(size=n), rng.uniform(0.1, 3.0, size=n)
            for increasing in (True, False):
                direction = Direction.NONDECREASING if increasing else Direction.NONINCREASING
                np.testing.assert_allclose(
                    pava(y, w, direction), isotonic_minmax(y, w, increasing), atol=1e-10
                )

    def test_preserves_weighted_sum(self, rng):
        """Pooling keeps the weighted total."""
        y, w = rng.normal(size=50), rng.uniform(0.5, 2.0, size=50)
        assert np.sum(w * pava(y, w)) == pytest.approx(np.sum(w * y))

    def test_bad_input(self):
        """Empty input and nonpositive weights are rejected."""
        with pytest.raises(DomainError):
            pava([])
        with pytest.raises(DomainError):
            pava([1.0, 2.0], [1.0, 0.0])
        with pytest.raises(DomainError):
            pava([1.0, 2.0], [1.0])


class TestHulls:
    """Tests for concave_majorant and convex_minorant."""

    def test_grenander_on_small_sample(self, small_sample):
        """Slope of the majorant of the ECDF of (0.1, 0.2, 0.6)."""
        f = slope(concave_majorant(ecdf(small_sample)))
        assert f.eval(0.1) == pytest.approx(10.0 / 3.0)
        assert f.eval(0.3) == pytest.approx(5.0 / 6.0)
        assert f.eval(0.9) == pytest.approx(0.0, abs=1e-12)

    def test_matches_gift_wrapping(self, rng, unit):
        """Vertices agree with a brute-force upper hull of the ECDF corners."""
        x = np.sort(rng.uniform(size=40))
        F = ecdf(Sample(values=x, domain=unit))
        hull = concave_majorant(F)
        corners_x = np.concatenate(([0.0], x, [1.0]))
        corners_y = np.concatenate(([0.0], np.arange(1, x.size + 1) / x.size, [1.0]))
        vx, vy = upper_hull(corners_x, corners_y)
        np.testing.assert_allclose(hull.eval(vx), vy, atol=1e-12)
        np.testing.assert_allclose(hull.eval(corners_x), np.interp(corners_x, vx, vy), atol=1e-12)

    def test_envelopes_dominate(self, valley_step):
        """Majorant above, minorant below, at both one-sided values."""
        F = valley_step
        probes = np.linspace(0.0, 1.0, 401)
        upper, lower = concave_majorant(F), convex_minorant(F)
        for side in (Side.RIGHT, Side.LEFT):
            assert np.all(upper.eval(probes) >= F.eval(probes, side) - 1e-12)
            assert np.all(lower.eval(probes) <= F.eval(probes, side) + 1e-12)

    def test_concave_input_is_its_own_majorant(self, unit):
        """A concave piecewise-affine function is unchanged."""
        F = PiecewiseAffine([0.0, 0.4, 1.0], [0.0, 2.0, 2.6])
        assert sup_distance(concave_majorant(F), F) == pytest.approx(0.0, abs=1e-12)

    def test_restriction(self, valley_step):
        """Hulls over a sub-interval live on that sub-interval."""
        J = Interval(0.3, 0.7)
        assert concave_majorant(valley_step, J).domain == J
        with pytest.raises(DomainError):
            convex_minorant(valley_step, Interval(0.5, 1.5))


class TestRegularizeAt:
    """Tests for regularize_at and mode_profile."""

    def test_recovers_u_shaped_truth(self, valley_step):
        """The cumulative of a U-shaped truth is its own regularization at the valley."""
        G = cumulative(valley_step)
        envelope, d = regularize_at(G, 0.5, ShapeKind.U_SHAPED)
        assert d <= 1e-12
        assert l1_distance(slope(envelope), valley_step) == pytest.approx(0.0, abs=1e-10)

    def test_recovers_unimodal_truth(self, unit):
        """Same for a unimodal truth and its peak."""
        g = StepFunction(unit, [0.2, 0.4, 0.6, 0.8], [0.5, 1.0, 2.0, 1.0, 0.5])
        envelope, d = regularize_at(cumulative(g), 0.5, ShapeKind.UNIMODAL)
        assert d <= 1e-12
        assert l1_distance(slope(envelope), g) == pytest.approx(0.0, abs=1e-10)

    def test_unimodal_envelope_may_jump(self, unit):
        """A jump of F at the mode is kept by the unimodal regularization."""
        F = StepFunction(unit, [0.5], [0.0, 1.0])
        envelope, d = regularize_at(F, 0.5, ShapeKind.UNIMODAL)
        assert envelope.jump_at == 0.5
        assert d == pytest.approx(0.0, abs=1e-12)

    def test_endpoint_modes(self, valley_step):
        """m = a and m = b are valid and give single hulls."""
        G = cumulative(valley_step)
        _, d_a = regularize_at(G, 0.0)
        _, d_b = regularize_at(G, 1.0)
        assert d_a >= 0 and d_b >= 0

    def test_mode_outside_domain(self, valley_step):
        """A mode outside [a, b] is rejected."""
        with pytest.raises(DomainError):
            regularize_at(valley_step, 1.5)

    def test_profile(self, valley_step):
        """Profile values match direct regularization errors."""
        points = [0.1, 0.5, 0.9]
        expected = [regularize_at(valley_step, m)[1] for m in points]
        np.testing.assert_allclose(mode_profile(valley_step, ShapeKind.U_SHAPED, points), expected)


class TestSelectMode:
    """Tests for select_mode."""

    def test_minimizes_over_candidates(self, rng, unit):
        """The selected error is not above the error at any breakpoint or cell midpoint."""
        x = rng.uniform(size=60)
        F = ecdf(Sample(values=x, domain=unit))
        selection = select_mode(F, ShapeKind.U_SHAPED)
        points = np.concatenate(([0.0, 1.0], F.breakpoints))
        mids = 0.5 * (points[:-1] + points[1:])
        candidates = np.unique(np.concatenate((points, mids)))
        best = float(np.min(mode_profile(F, ShapeKind.U_SHAPED, candidates)))
        assert selection.min_value <= best + 1e-12
        lo, hi = selection.min_interval
        assert lo <= selection.m <= hi

    def test_unimodal_on_continuous_input(self, rng, unit):
        """Bisection search does at least as well as the candidate grid."""
        g = StepFunction(unit, [0.3, 0.6], [1.0, 3.0, 0.5])
        noise = StepFunction(unit, np.linspace(0.05, 0.95, 19), rng.normal(0, 0.01, 20))
        F = PiecewiseAffine(
            np.linspace(0.0, 1.0, 21),
            cumulative(g).eval(np.linspace(0.0, 1.0, 21)) + noise.eval(np.linspace(0.0, 1.0, 21)),
        )
        selection = select_mode(F, ShapeKind.UNIMODAL)
        grid = np.linspace(0.0, 1.0, 41)
        best = float(np.min(mode_profile(F, ShapeKind.UNIMODAL, grid)))
        assert selection.min_value <= best + 1e-9
        assert selection.evaluations > 0

    @pytest.mark.parametrize("seed", [4, 17, 58])
    def test_unimodal_on_random_steps(self, seed, unit):
        """The selected mode beats a dense grid on a random 20-jump cumulative."""
        rng = np.random.default_rng(seed)
        jumps = np.sort(rng.uniform(0.02, 0.98, 20))
        levels = np.concatenate(([0.0], np.cumsum(rng.exponential(size=20))))
        F = StepFunction(unit, jumps, levels)
        selection = select_mode(F, ShapeKind.UNIMODAL)
        grid = np.linspace(0.0, 1.0, 10_000)
        best = float(np.min(mode_profile(F, ShapeKind.UNIMODAL, grid)))
        assert selection.min_value <= best + 1e-9
        _, d_at_mode = regularize_at(F, selection.m, ShapeKind.UNIMODAL)
        assert selection.min_value == pytest.approx(d_at_mode)
        lo, hi = selection.min_interval
        assert lo <= selection.m <= hi

    def test_monotone_shapes_use_endpoints(self, valley_step):
        """Nonincreasing uses b, nondecreasing uses a."""
        G = cumulative(valley_step)
        assert select_mode(G, ShapeKind.NONINCREASING).m == 1.0
        assert select_mode(G, ShapeKind.NONDECREASING).m == 0.0


class TestShapeMap:
    """Tests for shape_map."""

    def test_known_mode_is_used(self, valley_step):
        """A given mode bypasses selection."""
        estimate = shape_map(cumulative(valley_step), ShapeKind.U_SHAPED, mode=0.5)
        assert estimate.mode == 0.5
        assert estimate.selection is None

    def test_selected_mode_on_truth(self, valley_step):
        """Selection on an exact cumulative finds zero error."""
        estimate = shape_map(cumulative(valley_step), ShapeKind.U_SHAPED)
        assert estimate.min_value <= 1e-12
        assert estimate.selection is not None
        assert l1_distance(estimate.f, valley_step) == pytest.approx(0.0, abs=1e-9)

    def test_estimate_is_u_shaped(self, rng, unit):
        """Slopes of the envelope fall then rise."""
        F = ecdf(Sample(values=rng.beta(0.5, 0.5, size=200), domain=unit))
        f = shape_map(F, ShapeKind.U_SHAPED).f
        signs = np.sign(np.diff(f.values))
        signs = signs[signs != 0]
        rising = np.flatnonzero(signs > 0)
        assert rising.size == 0 or np.all(signs[rising[0]:] > 0)

    def test_non_monotone_input_is_flagged(self, unit):
        """A decreasing stretch in the cumulative input is reported."""
        F = StepFunction(unit, [0.3, 0.6], [0.0, 0.5, 0.2])
        estimate = shape_map(F, ShapeKind.UNIMODAL)
        assert estimate.monotone_input is False

    def test_nonincreasing_is_grenander(self, small_sample):
        """Nonincreasing shape gives the majorant slope over the whole interval."""
        estimate = shape_map(ecdf(small_sample), ShapeKind.NONINCREASING)
        assert estimate.mode == 1.0
        assert estimate.f.eval(0.0) == pytest.approx(10.0 / 3.0)
