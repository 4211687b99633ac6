"""
Unit tests for the c / c0 truncation models, norms and the c -> c0 isomorphism.
"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.common.errors import DomainError, PreconditionError, StructuralError, UnsupportedError
from src.common.exact_lp import Ordering
from src.common.seqspace import (
    Functional,
    PNormHandle,
    SeqVector,
    SpaceModel,
    basis_functional,
    basis_vector,
    bump_sequences,
    c0_model,
    c0_to_c,
    c_model,
    c_to_c0,
    dual_norm,
    embed,
    l1sum_model,
    limit_functional,
    ones_vector,
    pair,
    product_model,
    sup_norm,
    vector_norm,
)


def F(*values):
    return tuple(Fraction(v) for v in values)


class TestSpaceModel:
    """Test model validation."""

    def test_dimension_must_be_positive(self):
        """Test zero or non-integer dimensions are refused."""
        with pytest.raises(StructuralError):
            c0_model(0)
        with pytest.raises(StructuralError):
            SpaceModel(True)

    def test_product_needs_valid_split(self):
        """Test product models need 1 <= split < dim."""
        with pytest.raises(StructuralError):
            SpaceModel(4, norm="product_p", p=2, split=4)

    def test_product_needs_integer_p(self):
        """Test non-integer p is unsupported, p < 1 is out of domain."""
        with pytest.raises(UnsupportedError):
            SpaceModel(4, norm="product_p", p=Fraction(3, 2), split=2)
        with pytest.raises(DomainError):
            SpaceModel(4, norm="product_p", p=0, split=2)

    def test_coordinate_count(self):
        """Test the limit counts as a coordinate in c-models only."""
        assert c_model(3).coordinate_count == 4
        assert c0_model(3).coordinate_count == 3


class TestVectors:
    """Test vector arithmetic, pairing and shape checks."""

    def test_arithmetic_keeps_limit(self):
        """Test + - and scale act on the limit too."""
        x = SeqVector(F(1, 2), Fraction(1))
        y = SeqVector(F(0, 1), Fraction(-1))
        assert x + y == SeqVector(F(1, 3), Fraction(0))
        assert x - y == SeqVector(F(1, 1), Fraction(2))
        assert x.scale(Fraction(1, 2)) == SeqVector(F("1/2", 1), Fraction(1, 2))

    def test_one_based_indexing(self):
        """Test x[k] is the k-th coordinate."""
        x = SeqVector(F(5, 6, 7))
        assert x[1] == 5 and x[3] == 7
        assert x.support() == {1, 2, 3}

    def test_c0_vector_with_limit_rejected(self):
        """Test a nonzero limit is rejected in a c0 model."""
        with pytest.raises(StructuralError):
            SeqVector(F(1), Fraction(1)).point(c0_model(1))

    def test_pair_includes_limit(self):
        """Test pairing adds the limit coefficient times the limit."""
        f = Functional(F(1, -1), Fraction(2))
        x = SeqVector(F(3, 1), Fraction(1, 2))
        assert pair(f, x) == 3

    def test_pair_dimension_mismatch(self):
        """Test mismatched lengths raise StructuralError."""
        with pytest.raises(StructuralError):
            pair(Functional(F(1)), SeqVector(F(1, 2)))

    def test_basis_and_limit_functionals(self):
        """Test e_k, e_k^* and the limit functional."""
        model = c_model(3)
        assert pair(basis_functional(model, 2), basis_vector(model, 2)) == 1
        assert pair(limit_functional(model), ones_vector(model)) == 1
        with pytest.raises(StructuralError):
            basis_vector(model, 4)
        with pytest.raises(StructuralError):
            ones_vector(c0_model(2))

    def test_embed_copies_limit(self):
        """Test new coordinates of an embedded c-vector take the limit value."""
        assert embed(SeqVector(F(1), Fraction(3)), 3) == SeqVector(F(1, 3, 3), Fraction(3))


class TestNorms:
    """Test the norm kinds and the dual norm."""

    def test_sup_includes_limit(self):
        """Test the c sup norm sees the limit coordinate."""
        assert vector_norm(c_model(2), SeqVector(F(0, "1/2"), Fraction(-1))) == 1

    def test_l1sum(self):
        """Test ||(x, y)|| = ||x||_inf + ||y||_inf."""
        assert vector_norm(l1sum_model(2, 1), SeqVector(F(1, -2, 3))) == 5

    def test_product_p1_is_rational(self):
        """Test p = 1 products return a Fraction."""
        assert vector_norm(product_model(2, 1), SeqVector(F(1, 0, 0, "1/2"))) == Fraction(3, 2)

    def test_product_p2_is_handle(self):
        """Test p = 2 returns a power-sum handle compared without roots."""
        value = vector_norm(product_model(1, 2), SeqVector(F(1, 1)))
        assert value == PNormHandle(Fraction(2), 2)
        assert value.compare(Fraction(7, 5)) is Ordering.GREATER
        assert value.compare(Fraction(3, 2)) is Ordering.LESS
        assert str(value) == "(2)^(1/2)"

    def test_handles_with_different_p_do_not_compare(self):
        """Test ordering handles of different p raises StructuralError."""
        with pytest.raises(StructuralError):
            PNormHandle(Fraction(1), 2) < PNormHandle(Fraction(1), 3)

    def test_dual_norms(self):
        """Test dual norms of sup and l1sum models."""
        f = Functional(F(1, -2), Fraction(1))
        assert dual_norm(c_model(2), f) == 4
        g = Functional(F(1, -2, 3))
        assert dual_norm(l1sum_model(2, 1), g) == 3

    def test_sup_norm_empty(self):
        """Test the sup of nothing is 0."""
        assert sup_norm(()) == 0


class TestBumps:
    """Test the bump pair used in the diameter-two witnesses."""

    def test_bump_pair(self):
        """Test both bumps stay in the ball and differ by 2 e_k."""
        x = SeqVector(F("1/2", 0), Fraction(0))
        up, down = bump_sequences(x, 2)
        assert up == SeqVector(F("1/2", 1))
        assert down == SeqVector(F("1/2", -1))
        assert up - down == basis_vector(c_model(2), 2).scale(2)

    def test_bump_needs_unit_ball(self):
        """Test vectors outside the unit ball are rejected."""
        with pytest.raises(PreconditionError):
            bump_sequences(SeqVector(F(2, 0)), 1)


scalars = st.fractions(min_value=-4, max_value=4, max_denominator=8)


class TestCToC0:
    """Test the isomorphism T: c -> c0 and its norm bounds."""

    def test_ones_vector(self):
        """Test T(1) = e_1 / 2."""
        assert c_to_c0(ones_vector(c_model(2))) == SeqVector(F("1/2", 0, 0))

    def test_inverse_needs_c0_vector(self):
        """Test c0_to_c refuses vectors with a limit."""
        with pytest.raises(StructuralError):
            c0_to_c(SeqVector(F(1, 2), Fraction(1)))

    def test_constants_attained(self):
        """Test both ||Tx|| = ||x|| and ||x|| = 4 ||Tx|| occur."""
        x = SeqVector(F(-1), Fraction(1))
        assert sup_norm(c_to_c0(x).coords) == sup_norm(x.point(c_model(1))) == 1
        y = SeqVector(F(1), Fraction(1, 2))
        assert sup_norm(y.point(c_model(1))) == 4 * sup_norm(c_to_c0(y).coords)

    @given(st.lists(scalars, min_size=1, max_size=4), scalars)
    def test_round_trip_and_bounds(self, coords, limit):
        """Test c0_to_c inverts c_to_c0 and ||Tx|| <= ||x|| <= 4 ||Tx||."""
        x = SeqVector(tuple(coords), limit)
        Tx = c_to_c0(x)
        assert c0_to_c(Tx) == x
        norm_x = sup_norm(x.point(c_model(len(coords))))
        norm_Tx = sup_norm(Tx.coords)
        assert norm_Tx <= norm_x <= 4 * norm_Tx
