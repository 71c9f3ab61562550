"""
Tests for the verification harness: checks, report merging, random instances
and the fast deterministic suites.
"""

import numpy as np
import pytest

from bathtub.core.exceptions import UsageError
from bathtub.models.shape import ModelKind, Suite
from bathtub.models.stepfn import Interval
from bathtub.schemas.risk import RiskReport
from bathtub.services.verification import (
    Check,
    check_histogram_sandwich,
    check_marshall,
    check_oscillation,
    check_risk_bracket,
    merge_reports,
    random_partition,
    random_subinterval,
    verify_inequalities,
)


class TestCheck:
    """Tests for Check."""

    def test_inequality(self):
        """lhs <= rhs + tol passes."""
        assert Check(1.0, 1.0, 0.0).ok
        assert Check(0.5, 1.0, 0.0).ok
        assert not Check(1.1, 1.0, 0.05).ok

    def test_equality(self):
        """Equalities measure the absolute gap."""
        check = Check(0.5, 1.0, 1e-3, equality=True)
        assert check.excess == pytest.approx(0.5)
        assert not check.ok


class TestMergeReports:
    """Tests for merge_reports."""

    def test_combines_counts_and_prefixes(self):
        """Violations add up; metrics and rows carry the sub-report name."""
        a = RiskReport(
            name="a", mean_l1=1.0, stderr=0.3, replications=4, violations=1,
            metrics={"bound": 2.0}, violation_rows=("trial 0: bad",),
        )
        b = RiskReport(name="b", mean_l1=3.0, stderr=0.4, replications=6)
        merged = merge_reports("both", [a, b])
        assert merged.violations == 1
        assert merged.replications == 10
        assert merged.mean_l1 == pytest.approx(2.0)
        assert merged.stderr == pytest.approx(0.25)
        assert merged.metrics["a.bound"] == 2.0
        assert merged.metrics["b.violations"] == 0.0
        assert merged.violation_rows == ("a: trial 0: bad",)
        assert not merged.passed


class TestRandomInstances:
    """Tests for random_partition and random_subinterval."""

    def test_partitions_span(self, rng):
        """Random partitions cover the domain with at most max_cells cells."""
        domain = Interval(0.0, 20.0)
        for _ in range(50):
            pi = random_partition(rng, domain, max_cells=6)
            assert pi.spans(domain)
            assert 1 <= pi.size <= 6

    def test_subintervals(self, rng):
        """Subintervals are inside the domain and not too short."""
        domain = Interval(1.0, 3.0)
        for _ in range(50):
            J = random_subinterval(rng, domain)
            assert domain.contains_interval(J)
            assert J.length >= 2e-3


class TestInstanceChecks:
    """Per-instance checks that hold exactly."""

    def test_oscillation_identity(self, rng):
        """Holds on every random nonincreasing step."""
        assert all(check_oscillation(rng).ok for _ in range(25))

    @pytest.mark.parametrize("model", list(ModelKind))
    def test_histogram_sandwich(self, rng, model):
        """Endpoint increments <= histogram error <= bias + sup increments."""
        for _ in range(5):
            lower, upper = check_histogram_sandwich(rng, model)
            assert lower.ok
            assert upper.ok

    def test_valley_regularization_stays_close(self, rng):
        """Regularizing at a valley point does not move away from the truth."""
        assert all(check_marshall(rng).ok for _ in range(10))

    @pytest.mark.parametrize("model", [ModelKind.DENSITY, ModelKind.NHPP])
    def test_risk_bracket(self, rng, model):
        """The L1 error is within the bracket with C = 49."""
        assert all(check_risk_bracket(rng, model, 49.0).ok for _ in range(3))


class TestVerifyInequalities:
    """Tests for verify_inequalities."""

    def test_oscillation_suite(self):
        """A passing suite reports its trials and no violations."""
        report = verify_inequalities(Suite.OSCILLATION, 12, seed=3)
        assert report.passed
        assert report.replications == 12
        assert report.metrics["trials"] == 12.0
        assert report.name == "lemma4"

    def test_reproducible(self):
        """The report is a function of the seed."""
        a = verify_inequalities("lemma4", 6, seed=8)
        b = verify_inequalities("lemma4", 6, seed=8)
        assert a.per_rep == b.per_rep

    def test_sandwich_suite_has_both_sides(self):
        """The sandwich suite merges its lower and upper halves."""
        report = verify_inequalities(Suite.HISTOGRAM_SANDWICH, 4, seed=1)
        assert "lower.max_excess" in report.metrics
        assert "upper.max_excess" in report.metrics
        assert report.replications == 8
        assert report.passed

    def test_trials_must_be_positive(self):
        """Zero trials is a usage error."""
        with pytest.raises(UsageError):
            verify_inequalities(Suite.MARSHALL, 0)

    def test_unknown_suite(self):
        """Suite names are validated."""
        with pytest.raises(ValueError):
            verify_inequalities("lemma9", 3)


def test_random_partition_is_seeded():
    """Same generator seed, same partition."""
    a = random_partition(np.random.default_rng(4), Interval(0.0, 1.0))
    b = random_partition(np.random.default_rng(4), Interval(0.0, 1.0))
    np.testing.assert_array_equal(a.endpoints, b.endpoints)
