"""
Tests for intervals, partitions, step functions and piecewise-affine functions.
"""

import numpy as np
import pytest

from bathtub.core.exceptions import DomainError
from bathtub.models.shape import MonotoneFlag
from bathtub.models.stepfn import Interval, Partition, PiecewiseAffine, Side, StepFunction


class TestInterval:
    """Tests for Interval."""

    def test_rejects_empty_interval(self):
        """a must be strictly below b."""
        with pytest.raises(DomainError):
            Interval(1.0, 1.0)

    def test_rejects_infinite_endpoint(self):
        """Endpoints must be finite."""
        with pytest.raises(DomainError):
            Interval(0.0, float("inf"))

    def test_parse(self):
        """The a,b notation parses to floats."""
        interval = Interval.parse("0, 2.5")
        assert interval == Interval(0.0, 2.5)
        assert interval.length == 2.5
        assert interval.midpoint == 1.25

    def test_parse_garbage(self):
        """Non-numeric endpoints are a domain error."""
        with pytest.raises(DomainError):
            Interval.parse("zero,one")
        with pytest.raises(DomainError):
            Interval.parse("1")

    def test_domain_error_is_value_error(self):
        """Validators that raise DomainError are seen as ValueError."""
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)


class TestPartition:
    """Tests for Partition."""

    def test_uniform(self, unit):
        """Equal-width cells with exact endpoints."""
        pi = Partition.uniform(unit, 4)
        assert pi.size == 4
        np.testing.assert_allclose(pi.endpoints, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert pi.endpoints[-1] == 1.0
        assert pi.spans(unit)

    def test_rejects_unsorted(self):
        """Endpoints must increase strictly."""
        with pytest.raises(DomainError):
            Partition([0.0, 0.5, 0.5, 1.0])

    def test_cells(self):
        """Cells are consecutive intervals."""
        cells = Partition([0.0, 0.3, 1.0]).cells()
        assert cells == [Interval(0.0, 0.3), Interval(0.3, 1.0)]

    def test_trivial(self, unit):
        """The trivial partition has one cell."""
        assert Partition.trivial(unit).size == 1


class TestStepFunction:
    """Tests for StepFunction."""

    def test_right_and_left_values(self, unit):
        """Evaluation is cadlag; LEFT gives the left limit."""
        f = StepFunction(unit, [0.5], [1.0, 3.0])
        assert f.eval(0.25) == 1.0
        assert f.eval(0.5) == 3.0
        assert f.eval(0.5, Side.LEFT) == 1.0
        assert f(1.0) == 3.0

    def test_scalar_and_array(self, unit):
        """Scalars give floats, arrays give arrays."""
        f = StepFunction(unit, [0.5], [1.0, 3.0])
        assert isinstance(f.eval(0.1), float)
        np.testing.assert_array_equal(f.eval([0.0, 0.6]), [1.0, 3.0])

    def test_outside_domain(self, unit):
        """Points outside the domain are rejected."""
        f = StepFunction.constant(unit, 2.0)
        with pytest.raises(DomainError):
            f.eval(1.5)

    def test_value_count(self, unit):
        """One more value than breakpoints is required."""
        with pytest.raises(DomainError):
            StepFunction(unit, [0.5], [1.0])

    def test_monotone_flag_is_checked(self, unit):
        """A decreasing function cannot carry the nondecreasing flag."""
        with pytest.raises(DomainError):
            StepFunction(unit, [0.5], [2.0, 1.0], MonotoneFlag.NONDECREASING)

    def test_breakpoint_at_right_end(self, unit):
        """A breakpoint at b changes the value at b only."""
        f = StepFunction(unit, [0.5, 1.0], [1.0, 2.0, 3.0])
        assert f.eval(0.99) == 2.0
        assert f.eval(1.0) == 3.0
        assert f.eval(1.0, Side.LEFT) == 2.0

    def test_close_breakpoints_merge(self, unit):
        """Breakpoints closer than the tolerance merge; the later value wins."""
        f = StepFunction(unit, [0.5, 0.5 + 1e-14], [0.0, 1.0, 2.0])
        assert f.breakpoints.size == 1
        np.testing.assert_array_equal(f.values, [0.0, 2.0])

    def test_breakpoint_at_left_end_is_dropped(self, unit):
        """A breakpoint at a only sets the starting value."""
        f = StepFunction(unit, [0.0, 0.5], [7.0, 1.0, 2.0])
        assert f.eval(0.0) == 1.0
        assert f.breakpoints.tolist() == [0.5]

    def test_arrays_are_read_only(self, unit):
        """Instances are immutable."""
        f = StepFunction(unit, [0.5], [1.0, 3.0])
        with pytest.raises(ValueError):
            f.values[0] = 5.0

    def test_cells_and_jumps(self, valley_step):
        """Cells carry start, width and value; jumps are value differences."""
        starts, widths, values = valley_step.cells()
        np.testing.assert_allclose(starts, [0.0, 0.2, 0.4, 0.6, 0.8])
        np.testing.assert_allclose(widths, [0.2] * 5)
        np.testing.assert_array_equal(values, [3.0, 2.0, 0.5, 1.0, 4.0])
        np.testing.assert_allclose(valley_step.jumps, [-1.0, -1.5, 0.5, 3.0])

    def test_simplified(self, unit):
        """Redundant breakpoints are removed without changing values."""
        f = StepFunction(unit, [0.25, 0.5, 0.75], [1.0, 1.0, 2.0, 2.0])
        g = f.simplified()
        assert g.breakpoints.tolist() == [0.5]
        probes = np.linspace(0.0, 1.0, 101)
        np.testing.assert_array_equal(f.eval(probes), g.eval(probes))


class TestPiecewiseAffine:
    """Tests for PiecewiseAffine."""

    def test_interpolates(self, unit):
        """Values between knots are linear."""
        f = PiecewiseAffine.affine(unit, 1.0, 3.0)
        assert f.eval(0.5) == pytest.approx(2.0)
        assert f.eval(1.0) == 3.0
        np.testing.assert_allclose(f.slopes, [2.0])

    def test_single_jump(self):
        """One jump is allowed and reported."""
        f = PiecewiseAffine([0.0, 1.0, 2.0], [0.0, 5.0, 6.0], [0.0, 1.0, 6.0])
        assert f.jump_at == 1.0
        assert f.eval(1.0) == 5.0
        assert f.eval(1.0, Side.LEFT) == pytest.approx(1.0)
        assert f.eval(0.5) == pytest.approx(0.5)
        assert f.eval(1.5) == pytest.approx(5.5)
        np.testing.assert_allclose(f.slopes, [1.0, 1.0])

    def test_two_jumps_rejected(self):
        """At most one jump is allowed."""
        with pytest.raises(DomainError):
            PiecewiseAffine([0.0, 1.0, 2.0, 3.0], [0.0, 5.0, 9.0, 9.0], [0.0, 1.0, 6.0, 9.0])

    def test_continuous_has_no_jump(self, unit):
        """Continuous functions report no jump."""
        assert PiecewiseAffine.constant(unit, 4.0).jump_at is None

    def test_knots_must_increase(self):
        """Knots must be strictly increasing."""
        with pytest.raises(DomainError):
            PiecewiseAffine([0.0, 0.0, 1.0], [0.0, 1.0, 2.0])
