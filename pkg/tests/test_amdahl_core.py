"""
Unit tests for the speedup algebra module
"""

import math
import random

import pytest

from speeduplab.amdahl_core import (
    UNBOUNDED,
    amdahl_limit,
    exponent_approx,
    exponent_exact,
    exponent_from_fraction,
    exponent_from_ratio,
    fraction_approx_from_exponent,
    fraction_from_exponent,
    fraction_from_speedup,
    minimal_condition,
    speedup_from_exponent,
    speedup_from_exponent_approx,
    speedup_from_fraction,
)
from speeduplab.errors import AmdahlDomainError, MinimalConditionViolated


class TestAmdahlLaw:
    """Test cases for the classical formulas"""

    def test_fraction_08_saturates_at_five(self):
        """Test f=0.8 approaches 5 for a million processors"""
        assert speedup_from_fraction(0.8, 1e6) == pytest.approx(5, abs=1e-2)
        assert amdahl_limit(0.8) == pytest.approx(5, abs=1e-12)

    def test_fully_parallel_code(self):
        """Test f=1 gives linear speedup and an unbounded limit"""
        assert speedup_from_fraction(1.0, 8) == 8
        assert amdahl_limit(1.0) is UNBOUNDED

    def test_limit_rejects_out_of_range_fraction(self):
        """Test amdahl_limit needs f in (0, 1]"""
        with pytest.raises(AmdahlDomainError):
            amdahl_limit(0.0)
        with pytest.raises(AmdahlDomainError):
            amdahl_limit(1.5)

    def test_fraction_beyond_pole(self):
        """Test f >= p/(p-1) makes the denominator non-positive"""
        with pytest.raises(AmdahlDomainError, match="unbounded"):
            speedup_from_fraction(2.0, 3)

    def test_single_processor_rejected(self):
        """Test p must exceed 1"""
        with pytest.raises(AmdahlDomainError):
            speedup_from_fraction(0.5, 1)
        with pytest.raises(AmdahlDomainError):
            fraction_from_speedup(1.5, 1)

    def test_fraction_speedup_round_trip(self):
        """Test fraction -> speedup -> fraction over random inputs"""
        rng = random.Random(20240501)
        for _ in range(10_000):
            f = rng.uniform(0.01, 1.0)
            p = rng.uniform(1.5, 1e4)

            assert fraction_from_speedup(speedup_from_fraction(f, p), p) == pytest.approx(f, rel=1e-12)

    @pytest.mark.parametrize("f", [0.1, 0.5, 0.8, 0.99, 1.0])
    def test_speedup_increases_with_processors(self, f):
        """Test S(p) is strictly increasing for a fixed fraction"""
        processors = [1.5, 2, 3, 5, 10, 100, 1e3, 1e4, 1e5, 1e6]

        speedups = [speedup_from_fraction(f, p) for p in processors]

        assert all(b > a for a, b in zip(speedups, speedups[1:]))

    @pytest.mark.parametrize("p", [2, 3, 10, 1e3, 1e6])
    def test_linear_speedup_threshold_agrees_in_every_form(self, p):
        """Test f <= 1, F <= log((p-1)/p) and S <= p hold or fail together"""
        fractions = [0.1, 0.5, 0.9, 0.99, 1 + 0.25 / (p - 1), 1 + 0.5 / (p - 1), 1 + 0.9 / (p - 1)]

        for f in fractions:
            s = speedup_from_fraction(f, p)
            sublinear = f <= 1

            assert (exponent_exact(s) <= math.log((p - 1) / p)) == sublinear, f
            assert (s <= p) == sublinear, f


class TestExponent:
    """Test cases for the exponent of parallelism"""

    def test_exact_exponent_values(self):
        """Test F = log(1 - 1/S) for simple speedups"""
        assert exponent_exact(2.0) == pytest.approx(math.log(0.5))
        assert exponent_exact(10.0) == pytest.approx(math.log(0.9))

    def test_exact_exponent_needs_gain(self):
        """Test S <= 1 has no exponent"""
        with pytest.raises(AmdahlDomainError):
            exponent_exact(1.0)

    def test_exact_round_trip(self):
        """Test S -> F -> S over random speedups"""
        rng = random.Random(7)
        for _ in range(10_000):
            s = 1 + 10 ** rng.uniform(-2, 6)

            assert speedup_from_exponent(exponent_exact(s)) == pytest.approx(s, rel=1e-12)

    def test_non_negative_exponent_is_unbounded(self):
        """Test F >= 0 maps to an unbounded speedup"""
        assert speedup_from_exponent(0.0) is UNBOUNDED
        assert speedup_from_exponent(0.3) is UNBOUNDED
        assert speedup_from_exponent(-1.0) == pytest.approx(1 / (1 - math.exp(-1)))

    def test_exponent_agrees_with_fraction_definition(self):
        """Test log(f (p-1)/p) equals the exact exponent of Amdahl's speedup"""
        for s, p in [(1.5, 2.0), (4.0, 16.0), (50.0, 1000.0)]:
            f = fraction_from_speedup(s, p)

            assert exponent_from_fraction(f, p) == pytest.approx(exponent_exact(s), rel=1e-12)
            assert fraction_from_exponent(exponent_from_fraction(f, p), p) == pytest.approx(f, rel=1e-12)

    def test_approximation_error_for_large_speedups(self):
        """Test the quadratic approximation is within 0.1% for S >= 20"""
        s = 20.0
        while s < 1e7:
            exact = exponent_exact(s)
            approx = exponent_approx(s)

            assert abs(approx - exact) / abs(exact) <= 1e-3
            s *= 1.37

    def test_approximation_at_boundary(self):
        """Test S = 2 gives F = -1 and S < 2 violates the minimal condition"""
        assert exponent_approx(2.0) == -1.0
        with pytest.raises(MinimalConditionViolated) as exc_info:
            exponent_approx(1.5)
        assert exc_info.value.ratio == pytest.approx(2 / 3)

    def test_ratio_form(self):
        """Test F = -1 + sqrt(1 - 2r) with r = 0.1"""
        assert exponent_from_ratio(0.1) == pytest.approx(-1 + math.sqrt(0.8), rel=1e-15)
        with pytest.raises(MinimalConditionViolated):
            exponent_from_ratio(0.6)

    def test_small_ratio_has_no_cancellation(self):
        """Test tiny ratios keep full relative precision"""
        assert exponent_from_ratio(1e-20) == pytest.approx(-1e-20, rel=1e-12)

    def test_approximate_inverse(self):
        """Test S = -1/(F + F^2/2) inverts the approximation"""
        for s in [2.0, 3.0, 10.0, 1e4]:
            assert speedup_from_exponent_approx(exponent_approx(s)) == pytest.approx(s, rel=1e-9)
        with pytest.raises(AmdahlDomainError):
            speedup_from_exponent_approx(0.0)

    def test_approximate_fraction_overshoots_at_zero(self):
        """Test F = 0 gives p/(p-1) in the truncated series"""
        assert fraction_approx_from_exponent(0.0, 10) == pytest.approx(10 / 9)


class TestMinimalCondition:
    """Test cases for T_par(p,n) <= T_par(1,n)/2"""

    def test_condition(self):
        """Test the boundary is inclusive"""
        assert minimal_condition(5.0, 10.0)
        assert not minimal_condition(6.0, 10.0)

    def test_condition_rejects_non_positive_times(self):
        """Test times must be positive"""
        with pytest.raises(AmdahlDomainError):
            minimal_condition(0.0, 10.0)
