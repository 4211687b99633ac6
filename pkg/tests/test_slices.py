"""
Tests for slices and the p-product lower bound certificates.
"""

import random
from fractions import Fraction

import pytest

from src.common.errors import PreconditionError, StructuralError, TruncationTooSmallError, UnsupportedError
from src.common.seqspace import Functional, PNormHandle, SeqVector
from src.experiments.certificates import CertificateKind, SliceSpec
from src.experiments.instances import random_prop21_specs
from src.experiments.slices import (
    factor_l1,
    product_sup_upper,
    prop21_certificate,
    prop21_exact_p1,
    prop21_exact_p1_certificate,
    slice_of,
)
from src.geometry.constructions import build_product_ball_p1


def V(*coords):
    return SeqVector(tuple(Fraction(c) for c in coords))


def F(*coeffs):
    return Functional(tuple(Fraction(c) for c in coeffs))


def e1_slice(alpha="1/2", weight=1):
    return SliceSpec(F(1, 0, 0, 0), Fraction(alpha), Fraction(weight))


class TestSliceOf:
    """Test closed slices of polytopes."""

    def test_diamond_slice(self):
        """Test {x1 >= 1/2} on the diamond is a triangle."""
        S = slice_of(build_product_ball_p1(1), F(1, 0), Fraction(1, 2))
        assert set(S.vertices) == {V(1, 0), V("1/2", "1/2"), V("1/2", "-1/2")}

    def test_deep_slice_is_whole_body(self):
        """Test depths beyond the width return the body itself."""
        ball = build_product_ball_p1(1)
        assert set(slice_of(ball, F(1, 0), 5).vertices) == set(ball.vertices)

    def test_bad_depth_or_functional(self):
        """Test non-positive depths and zero functionals are refused."""
        ball = build_product_ball_p1(1)
        with pytest.raises(PreconditionError):
            slice_of(ball, F(1, 0), 0)
        with pytest.raises(PreconditionError):
            slice_of(ball, F(0, 0), Fraction(1, 2))

    def test_slice_spec_validation(self):
        """Test SliceSpec rejects bad depth, weight and functional."""
        with pytest.raises(PreconditionError):
            SliceSpec(F(1, 0), Fraction(0))
        with pytest.raises(PreconditionError):
            SliceSpec(F(1, 0), Fraction(1), Fraction(-1))
        with pytest.raises(PreconditionError):
            SliceSpec(F(0, 0), Fraction(1))


class TestProductSphere:
    """Test the dual-norm helpers on c0 (+)_p c0."""

    def test_factor_l1(self):
        """Test the l1 norms of both halves."""
        assert factor_l1(F(1, -2, 3, 0), 2) == (Fraction(3), Fraction(3))

    def test_sup_upper_p1(self):
        """Test p = 1 gives the max of the factor norms."""
        assert product_sup_upper(Fraction(2), Fraction(3), 1) == (Fraction(3), Fraction(2), Fraction(3))

    def test_sup_upper_p2(self):
        """Test the p = 2 bound sits just above sqrt(a^2 + b^2)."""
        U, _, _ = product_sup_upper(Fraction(1), Fraction(1), 2)
        assert 2 <= U ** 2 < 2 + Fraction(1, 1000)


class TestProp21:
    """Test the lower-bound certificate."""

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_single_slice(self, p):
        """Test one slice around e_1* certifies (99/100)^(1/p)."""
        cert = prop21_certificate(p, [e1_slice()], Fraction(1, 100), 2)
        assert cert.kind is CertificateKind.PROP21_LOWER_BOUND
        assert cert.passed
        assert cert.bound == PNormHandle(Fraction(99, 100), p)
        assert cert.witnesses["k"] == 2
        assert cert.witnesses["power_sum"] == str(2 ** p)

    def test_two_slices(self):
        """Test a combination mixing both factors at p = 2."""
        specs = [
            SliceSpec(F(1, 0, 0, 0), Fraction(1, 4), Fraction(1, 2)),
            SliceSpec(F(0, 0, 1, 0), Fraction(1, 4), Fraction(1, 2)),
        ]
        cert = prop21_certificate(2, specs, Fraction(1, 100), 2)
        assert cert.passed
        assert cert.parameters["slices"] == 2

    def test_truncation_too_small(self):
        """Test no room for a bump coordinate is reported."""
        with pytest.raises(TruncationTooSmallError):
            prop21_certificate(2, [SliceSpec(F(1, 0), Fraction(1, 2))], Fraction(1, 100), 1)

    def test_input_errors(self):
        """Test p, eps', weights and dimensions are validated."""
        with pytest.raises(UnsupportedError):
            prop21_certificate(Fraction(3, 2), [e1_slice()])
        with pytest.raises(PreconditionError):
            prop21_certificate(2, [e1_slice()], Fraction(1))
        with pytest.raises(PreconditionError):
            prop21_certificate(2, [e1_slice(weight="1/2")])
        with pytest.raises(StructuralError):
            prop21_certificate(2, [e1_slice(weight="1/2"), SliceSpec(F(1, 0), Fraction(1), Fraction(1, 2))])
        with pytest.raises(StructuralError):
            prop21_certificate(2, [e1_slice()], d_each=3)

    @pytest.mark.slow
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_random_combinations(self, p):
        """Test seeded random combinations all certify."""
        rng = random.Random(p)
        for _ in range(20):
            d_each, specs = random_prop21_specs(rng)
            assert prop21_certificate(p, specs, Fraction(1, 100), d_each).passed


class TestExactP1:
    """Test the exact p = 1 diameter."""

    def test_single_slice(self):
        """Test {x1 >= 1/2} in the d_each = 2 ball has diameter 2."""
        result = prop21_exact_p1([e1_slice()], 2)
        assert result.value == 2
        assert result.exact

    def test_certificate(self):
        """Test the exact certificate passes and keeps its pair."""
        cert = prop21_exact_p1_certificate([e1_slice()], 2)
        assert cert.kind is CertificateKind.PROP21_EXACT_P1
        assert cert.passed
        assert cert.bound == 2
        assert len(cert.witnesses["pair"]) == 2

    @pytest.mark.slow
    def test_random_combinations_reach_one(self):
        """Test seeded random p = 1 combinations have exact diameter >= 1 and >= the certified bound."""
        rng = random.Random(1)
        for _ in range(20):
            d_each, specs = random_prop21_specs(rng)
            exact = prop21_exact_p1(specs, d_each)
            lower = prop21_certificate(1, specs, Fraction(1, 100), d_each)
            assert exact.exact
            assert exact.value >= 1
            assert exact.value >= lower.bound.power_sum
