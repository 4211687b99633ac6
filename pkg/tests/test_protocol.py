"""
Unit tests for the JSON codec.

Covers scalar, vector, model, polytope, certificate and spec encoding, the
canonical byte form and the errors raised on malformed input.
"""

from fractions import Fraction

import pytest

from src.common.errors import SpecError, StructuralError
from src.common.protocol import (
    ExperimentSpec,
    canonical_json_bytes,
    content_hash,
    decode_bound,
    decode_certificate,
    decode_functional,
    decode_model,
    decode_polytope,
    decode_scalar,
    decode_spec,
    decode_vector,
    encode_bound,
    encode_certificate,
    encode_functional,
    encode_model,
    encode_polytope,
    encode_scalar,
    encode_spec,
    encode_vector,
)
from src.common.seqspace import Functional, PNormHandle, SeqVector, c_model, gauge_model, pair, product_model
from src.experiments.certificates import Certificate, CertificateKind
from src.geometry.polytope import hull_of


class TestScalars:
    """Test scalar and bound encoding."""

    def test_lowest_terms(self):
        """Test scalars are written as reduced 'p/q' strings."""
        assert encode_scalar(Fraction(6, 8)) == "3/4"
        assert encode_scalar(-2) == "-2"

    def test_decode_accepts_int_and_string(self):
        """Test JSON integers and strings both decode."""
        assert decode_scalar(3) == 3
        assert decode_scalar("-1/3") == Fraction(-1, 3)

    def test_decode_rejects_float_bool_garbage(self):
        """Test floats, booleans and bad strings raise StructuralError."""
        for bad in (0.25, True, "x/2", None, [1]):
            with pytest.raises(StructuralError):
                decode_scalar(bad)

    def test_bound_handle(self):
        """Test a p-norm handle survives encoding as power sum and p."""
        handle = PNormHandle(Fraction(99, 100), 2)
        encoded = encode_bound(handle)
        assert encoded == {"power_sum": "99/100", "p": 2}
        assert decode_bound(encoded) == handle
        assert decode_bound("1/4") == Fraction(1, 4)


class TestVectors:
    """Test vector and functional encoding."""

    def test_vector_fields(self):
        """Test a vector encodes coords and limit as scalars."""
        x = SeqVector((Fraction(1, 2), Fraction(0)), Fraction(-1))
        assert encode_vector(x) == {"coords": ["1/2", "0"], "limit": "-1"}
        assert decode_vector(encode_vector(x)) == x

    def test_missing_limit_defaults_to_zero(self):
        """Test c0 vectors may omit the limit or write it as null."""
        assert decode_vector({"coords": ["1"]}) == SeqVector((Fraction(1),))
        assert decode_vector({"coords": ["1", "1/2"], "limit": None}) == SeqVector((Fraction(1), Fraction(1, 2)))

    def test_vector_malformed(self):
        """Test non-object input and non-list coords are rejected."""
        with pytest.raises(StructuralError):
            decode_vector([1, 2])
        with pytest.raises(StructuralError):
            decode_vector({"coords": "1,2"})
        with pytest.raises(StructuralError):
            decode_vector({"limit": "0"})
        with pytest.raises(StructuralError):
            decode_vector({"coords": ["1"], "lim": "0"})

    def test_functional(self):
        """Test functionals keep their limit coefficient."""
        f = Functional((Fraction(1), Fraction(-2)), Fraction(1, 3))
        assert encode_functional(f) == {"coeffs": ["1", "-2"], "limit_coeff": "1/3"}
        assert decode_functional(encode_functional(f)) == f
        with pytest.raises(StructuralError):
            decode_functional({"coeffs": 5})

    def test_limit_functional(self):
        """Test the limit functional written with limit_coeff keeps its coefficient."""
        f = decode_functional({"coeffs": ["0", "0"], "limit_coeff": "1"})
        assert f.limit_coeff == 1
        assert pair(f, SeqVector((Fraction(1), Fraction(-1)), Fraction(-1))) == -1

    def test_functional_unknown_key(self):
        """Test a misspelt limit coefficient is refused, not dropped."""
        with pytest.raises(StructuralError):
            decode_functional({"coeffs": ["0", "0"], "limit": "1"})


class TestModelsAndPolytopes:
    """Test model and polytope encoding."""

    def test_product_model(self):
        """Test product models keep p and split."""
        model = product_model(2, 3)
        encoded = encode_model(model)
        assert encoded["norm"] == {"kind": "product_p", "p": 3, "split": 2}
        assert decode_model(encoded) == model

    def test_gauge_model_carries_ball(self):
        """Test gauge models embed their unit ball."""
        ball = hull_of(c_model(1), [SeqVector((Fraction(a),), Fraction(b)) for a in (1, -1) for b in (1, -1)])
        encoded = encode_model(gauge_model(ball))
        assert "ball" in encoded["norm"]
        assert set(decode_model(encoded).ball.vertices) == set(ball.vertices)

    def test_polytope(self):
        """Test vertices and the canonical flag survive."""
        P = hull_of(c_model(1), [SeqVector((Fraction(1),), Fraction(0)), SeqVector((Fraction(0),), Fraction(1))])
        back = decode_polytope(encode_polytope(P))
        assert back.vertices == P.vertices
        assert back.canonical
        assert back.model == P.model

    def test_model_missing_norm(self):
        """Test a model without a norm field is rejected."""
        with pytest.raises(StructuralError):
            decode_model({"dim": 2})

    def test_norm_object_form(self):
        """Test the norm may be an object carrying its own parameters."""
        assert decode_model({"dim": 2, "has_limit": True, "norm": {"kind": "sup"}}) == c_model(2)
        assert decode_model({"dim": 4, "norm": {"kind": "product_p", "p": 3, "split": 2}}) == product_model(2, 3)
        assert encode_model(c_model(2)) == {"dim": 2, "has_limit": True, "norm": {"kind": "sup"}}

    def test_flat_norm_string(self):
        """Test a bare norm string with sibling parameters still decodes."""
        assert decode_model({"dim": 4, "norm": "product_p", "p": 3, "split": 2}) == product_model(2, 3)

    @pytest.mark.parametrize(
        "data",
        [
            {"dim": 2, "has_limit": "false", "norm": {"kind": "sup"}},
            {"dim": 2, "has_limit": 1, "norm": {"kind": "sup"}},
            {"dim": 2, "norm": {"kind": "sup", "radius": 1}},
            {"dim": 2, "norm": {"kind": "sup"}, "p": 2},
            {"dim": 2, "norm": {"kind": "gauge"}},
        ],
    )
    def test_model_strict(self, data):
        """Test non-boolean has_limit, unknown keys and a gauge without ball are refused."""
        with pytest.raises(StructuralError):
            decode_model(data)

    def test_polytope_strict(self):
        """Test string flags and empty vertex lists are refused."""
        model = {"dim": 1, "norm": {"kind": "sup"}}
        with pytest.raises(StructuralError):
            decode_polytope({"model": model, "vertices": [{"coords": ["1"]}], "canonical": "true"})
        with pytest.raises(StructuralError):
            decode_polytope({"model": model, "vertices": []})


class TestCanonicalBytes:
    """Test canonical JSON bytes and hashes."""

    def test_key_order_irrelevant(self):
        """Test dicts with the same items give the same bytes."""
        assert canonical_json_bytes({"b": 1, "a": [1, 2]}) == canonical_json_bytes({"a": [1, 2], "b": 1})
        assert canonical_json_bytes({"a": 1}) == b'{"a":1}'

    def test_content_hash(self):
        """Test hashes are sha256 hex and sensitive to content."""
        h = content_hash({"a": "1/2"})
        assert len(h) == 64
        assert h == content_hash({"a": "1/2"})
        assert h != content_hash({"a": "1/3"})


class TestCertificates:
    """Test certificate encoding."""

    def _cert(self):
        return Certificate(
            kind=CertificateKind.K0_SMALL_COMBO,
            bound=Fraction(1, 4),
            passed=True,
            parameters={"stage": 2, "alpha": "1/8"},
            witnesses={"pair": [{"coords": ["1"], "limit": "0"}]},
            N=3,
            ledger_hash="ab" * 32,
        )

    def test_fields(self):
        """Test every certificate field is encoded."""
        encoded = encode_certificate(self._cert())
        assert encoded["kind"] == "k0_small_combo"
        assert encoded["bound"] == "1/4"
        assert encoded["verdict"] == "pass"
        assert encoded["exact"] is True
        assert encoded["N"] == 3

    def test_decode(self):
        """Test decoding restores kind, bound, verdict and payload."""
        cert = decode_certificate(encode_certificate(self._cert()))
        assert cert.kind is CertificateKind.K0_SMALL_COMBO
        assert cert.bound == Fraction(1, 4)
        assert cert.passed
        assert cert.parameters == {"stage": 2, "alpha": "1/8"}
        assert cert.ledger_hash == "ab" * 32

    def test_unknown_kind_and_verdict(self):
        """Test unknown kinds, verdicts and non-boolean exact flags are rejected."""
        encoded = encode_certificate(self._cert())
        with pytest.raises(StructuralError):
            decode_certificate(dict(encoded, kind="prop99"))
        with pytest.raises(StructuralError):
            decode_certificate(dict(encoded, verdict="maybe"))
        with pytest.raises(StructuralError):
            decode_certificate(dict(encoded, exact="false"))


class TestSpecs:
    """Test experiment spec decoding."""

    def test_defaults(self):
        """Test parameters and seed are optional."""
        spec = decode_spec({"kind": "prop21"})
        assert spec == ExperimentSpec("prop21", {}, None)
        assert encode_spec(spec) == {"kind": "prop21", "parameters": {}, "seed": None}

    @pytest.mark.parametrize(
        "data, field",
        [
            ([], "$"),
            ({"parameters": {}}, "kind"),
            ({"kind": ""}, "kind"),
            ({"kind": "prop21", "parameters": [1]}, "parameters"),
            ({"kind": "prop21", "seed": "7"}, "seed"),
            ({"kind": "prop21", "seed": True}, "seed"),
            ({"kind": "prop21", "extra": 1}, "extra"),
        ],
    )
    def test_errors_name_the_field(self, data, field):
        """Test SpecError points at the offending field."""
        with pytest.raises(SpecError) as info:
            decode_spec(data)
        assert info.value.field == field
