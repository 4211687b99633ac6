"""
Tests for the convex-hull splitting identity and the l1-sum slice transfer.
"""

import random
from fractions import Fraction

import pytest

from src.common.errors import PreconditionError, StructuralError
from src.common.seqspace import Functional, SeqVector, c0_model, c_model
from src.experiments.certificates import CertificateKind, SliceSpec
from src.experiments.instances import random_l1sum_instance, random_lemma24_instance
from src.experiments.lemmas import decompose, l1sum_combo_transfer, l1sum_inclusion_check, lemma24_check
from src.geometry.polytope import hull_of


def V(*coords):
    return SeqVector(tuple(Fraction(c) for c in coords))


def pair_A():
    return hull_of(c0_model(2), [V(1, 1), V(1, -1)])


def kite_B():
    return hull_of(c0_model(2), [V(0, 1), V(0, -1), V("1/2", 0), V("-1/2", 0)])


def interval():
    return hull_of(c0_model(1), [V(1), V(-1)])


class TestLemma24:
    """Test co(A U -A U B) = co(A U B) U co(-A U B)."""

    def test_hand_instance(self):
        """Test a two-point A with a kite containing (A - A)/2."""
        cert = lemma24_check(pair_A(), kite_B(), seed=3)
        assert cert.kind is CertificateKind.LEMMA24_EQUALITY
        assert cert.passed
        assert set(cert.witnesses["sides"]) <= {"A", "-A"}

    def test_hypothesis_enforced(self):
        """Test B missing (a - a')/2 is refused."""
        B = hull_of(c0_model(2), [V("1/2", 0), V("-1/2", 0)])
        with pytest.raises(PreconditionError):
            lemma24_check(pair_A(), B)

    def test_models_must_match(self):
        """Test A and B in different models are refused."""
        B = hull_of(c_model(2), [SeqVector((Fraction(0), Fraction(0)), Fraction(1))])
        with pytest.raises(StructuralError):
            lemma24_check(pair_A(), B)

    @pytest.mark.parametrize("x", [V(0, 0), V(1, 1), V(-1, "1/2"), V("1/4", "-1/2")])
    def test_decompose_reproduces(self, x):
        """Test the re-derived pieces add back up to x."""
        pieces = decompose(pair_A(), kite_B(), x)
        assert pieces["reproduces"]
        assert pieces["half_difference_in_B"]
        assert pieces["side"] in ("A", "-A")

    def test_decompose_outside(self):
        """Test points outside the hull are refused."""
        with pytest.raises(PreconditionError):
            decompose(pair_A(), kite_B(), V(2, 0))

    def test_random_instances(self):
        """Test seeded random instances all satisfy the identity."""
        rng = random.Random(5)
        for _ in range(25):
            A, B = random_lemma24_instance(rng)
            assert lemma24_check(A, B, seed=rng.randrange(1000)).passed

    @pytest.mark.slow
    def test_hundred_random_instances(self):
        """Test 100 seeded random instances satisfy the identity."""
        rng = random.Random(24)
        for _ in range(100):
            A, B = random_lemma24_instance(rng)
            assert lemma24_check(A, B, seed=rng.randrange(1000)).passed


class TestL1Sum:
    """Test slices of l1 sums."""

    def test_inclusion_on_diamond(self):
        """Test the slice of depth 1/4 sits in S(B_X, e1*, 1/2) x (1/4) B_Y."""
        cert = l1sum_inclusion_check(interval(), interval(), Functional((Fraction(1),)), Fraction(1, 2), Fraction(1, 4))
        assert cert.kind is CertificateKind.L1SUM_INCLUSION
        assert cert.passed
        assert len(cert.witnesses["vertices"]) == 3

    def test_inclusion_needs_mu_below_alpha(self):
        """Test mu >= alpha is refused."""
        with pytest.raises(PreconditionError):
            l1sum_inclusion_check(interval(), interval(), Functional((Fraction(1),)), Fraction(1, 4), Fraction(1, 4))

    def test_inclusion_dimension_mismatch(self):
        """Test the functional must live on B1."""
        with pytest.raises(StructuralError):
            l1sum_inclusion_check(interval(), interval(), Functional((Fraction(1), Fraction(0))), Fraction(1, 2), Fraction(1, 4))

    def test_random_inclusions(self):
        """Test seeded random instances all pass."""
        rng = random.Random(9)
        for _ in range(25):
            assert l1sum_inclusion_check(*random_l1sum_instance(rng)).passed

    @pytest.mark.slow
    def test_fifty_random_inclusions(self):
        """Test 50 seeded random inclusion instances pass."""
        rng = random.Random(50)
        for _ in range(50):
            assert l1sum_inclusion_check(*random_l1sum_instance(rng)).passed

    def test_combo_transfer(self):
        """Test the lifted combination grows by at most 2 mu."""
        spec = SliceSpec(Functional((Fraction(1),)), Fraction(1, 2))
        cert = l1sum_combo_transfer(interval(), interval(), [spec], Fraction(1, 4))
        assert cert.kind is CertificateKind.L1SUM_COMBO_TRANSFER
        assert cert.passed
        assert cert.witnesses["factor_diameter"] == "1/2"
        assert cert.witnesses["lifted_diameter"] == "1/2"
        assert cert.bound == 1

    def test_combo_transfer_needs_small_mu(self):
        """Test mu must stay below every normalised depth."""
        spec = SliceSpec(Functional((Fraction(1),)), Fraction(1, 2))
        with pytest.raises(PreconditionError):
            l1sum_combo_transfer(interval(), interval(), [spec], Fraction(1, 2))
