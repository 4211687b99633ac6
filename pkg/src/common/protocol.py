"""
JSON encoding/decoding for every artifact the lab writes.

Scalar:      "p/q" or "n" (lowest terms); decoders also accept JSON integers
SeqVector:   {"coords": [scalar...], "limit": scalar | null}  (null or absent means 0)
Functional:  {"coeffs": [scalar...], "limit_coeff": scalar}
SpaceModel:  {"dim", "has_limit", "norm": {"kind", "p"?, "split"?, "ball"?}}
             (a bare norm string with sibling "p"/"split"/"ball" keys also decodes)
VPolytope:   {"model", "vertices": [vector...], "canonical"}
StageLedger: {"N", "l2", "mesh_denominator", "model", "stages": [...], "nets": [vector...]}
Certificate: {"kind", "bound", "verdict", "exact", "N", "ledger_hash", "parameters", "witnesses"}
Spec:        {"kind", "parameters", "seed"}

Decoders reject fields they do not know.

Canonical bytes: sorted keys, compact separators, UTF-8. content_hash is the
sha256 hex digest of those bytes.
"""

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from src.common.errors import DomainError, SpecError, StructuralError
from src.common.exact_lp import scalar_str, to_scalar
from src.common.seqspace import GAUGE, Functional, PNormHandle, SeqVector, SpaceModel


# -------------------------
# Canonical bytes
# -------------------------
def canonical_json_bytes(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def content_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json_bytes(obj)).hexdigest()


def _require(data: Any, key: str, kind: str):
    if not isinstance(data, dict):
        raise StructuralError(f"{kind} must be a JSON object, got {type(data).__name__}")
    if key not in data:
        raise StructuralError(f"{kind} is missing field '{key}'")
    return data[key]


def _reject_unknown(data: dict, allowed: tuple, kind: str):
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise StructuralError(f"{kind} has unknown field '{unknown[0]}'")


def _strict_bool(value, what: str) -> bool:
    if not isinstance(value, bool):
        raise StructuralError(f"{what} must be true or false, got {value!r}")
    return value


# -------------------------
# Scalars
# -------------------------
def encode_scalar(value) -> str:
    return scalar_str(to_scalar(value))


def decode_scalar(data) -> Fraction:
    if isinstance(data, bool) or not isinstance(data, (str, int)):
        raise StructuralError(f"Scalar must be a 'p/q' string or an integer, got {data!r}")
    try:
        return to_scalar(data)
    except DomainError as e:
        raise StructuralError(str(e))


def encode_bound(value) -> Any:
    """Fractions as scalars; p-norm handles as {"power_sum", "p"}."""
    if isinstance(value, PNormHandle):
        return {"power_sum": encode_scalar(value.power_sum), "p": value.p}
    return encode_scalar(value)


def decode_bound(data):
    if isinstance(data, dict):
        return PNormHandle(decode_scalar(_require(data, "power_sum", "bound")), int(_require(data, "p", "bound")))
    return decode_scalar(data)


# -------------------------
# Vectors and functionals
# -------------------------
def encode_vector(x: SeqVector) -> dict:
    return {"coords": [encode_scalar(v) for v in x.coords], "limit": encode_scalar(x.limit)}


def decode_vector(data) -> SeqVector:
    coords = _require(data, "coords", "vector")
    _reject_unknown(data, ("coords", "limit"), "vector")
    if not isinstance(coords, list):
        raise StructuralError(f"vector coords must be a list, got {type(coords).__name__}")
    limit = data.get("limit")
    return SeqVector(tuple(decode_scalar(v) for v in coords), Fraction(0) if limit is None else decode_scalar(limit))


def encode_functional(f: Functional) -> dict:
    return {"coeffs": [encode_scalar(v) for v in f.coeffs], "limit_coeff": encode_scalar(f.limit_coeff)}


def decode_functional(data) -> Functional:
    coeffs = _require(data, "coeffs", "functional")
    _reject_unknown(data, ("coeffs", "limit_coeff"), "functional")
    if not isinstance(coeffs, list):
        raise StructuralError(f"functional coeffs must be a list, got {type(coeffs).__name__}")
    return Functional(tuple(decode_scalar(v) for v in coeffs), decode_scalar(data.get("limit_coeff", "0")))


# -------------------------
# Models and polytopes
# -------------------------
def encode_model(model: SpaceModel) -> dict:
    norm = {"kind": model.norm}
    if model.p is not None:
        norm["p"] = model.p
    if model.split is not None:
        norm["split"] = model.split
    if model.norm == GAUGE:
        norm["ball"] = encode_polytope(model.ball)
    return {"dim": model.dim, "has_limit": model.has_limit, "norm": norm}


def decode_model(data) -> SpaceModel:
    norm = _require(data, "norm", "model")
    if isinstance(norm, dict):
        _reject_unknown(data, ("dim", "has_limit", "norm"), "model")
        _reject_unknown(norm, ("kind", "p", "split", "ball"), "model norm")
        details = norm
        kind = _require(norm, "kind", "model norm")
    else:
        _reject_unknown(data, ("dim", "has_limit", "norm", "p", "split", "ball"), "model")
        details = data
        kind = norm
    ball = None
    if kind == GAUGE:
        ball = decode_polytope(_require(details, "ball", "model"))
    return SpaceModel(
        _require(data, "dim", "model"),
        _strict_bool(data.get("has_limit", False), "model has_limit"),
        kind,
        details.get("p"),
        details.get("split"),
        ball,
    )


def encode_polytope(P) -> dict:
    return {
        "model": encode_model(P.model),
        "vertices": [encode_vector(v) for v in P.vertices],
        "canonical": P.canonical,
    }


def decode_polytope(data):
    from src.geometry.polytope import VPolytope

    vertices = _require(data, "vertices", "polytope")
    _reject_unknown(data, ("model", "vertices", "canonical"), "polytope")
    if not isinstance(vertices, list) or not vertices:
        raise StructuralError("polytope vertices must be a nonempty list")
    return VPolytope(
        decode_model(_require(data, "model", "polytope")),
        tuple(decode_vector(v) for v in vertices),
        _strict_bool(data.get("canonical", False), "polytope canonical"),
    )


# -------------------------
# Ledger
# -------------------------
def encode_ledger(ledger) -> dict:
    return {
        "N": ledger.N,
        "l2": ledger.l2,
        "mesh_denominator": ledger.mesh_denominator,
        "model": encode_model(ledger.model),
        "stages": [
            {
                "n": s.n,
                "m": s.m,
                "l": s.l,
                "radius": encode_scalar(s.radius),
                "eps": encode_scalar(s.eps),
                "vertices": [encode_vector(v) for v in s.K.vertices],
            }
            for s in ledger.stages
        ],
        "nets": [encode_vector(g) for g in ledger.nets],
    }


def decode_ledger(data):
    from src.geometry.constructions import StageLedger, StageRecord
    from src.geometry.polytope import VPolytope

    model = decode_model(_require(data, "model", "ledger"))
    stages = []
    for s in _require(data, "stages", "ledger"):
        K = VPolytope(model, tuple(decode_vector(v) for v in _require(s, "vertices", "stage")), canonical=True)
        stages.append(
            StageRecord(
                int(s["n"]), K, int(s["m"]), int(s["l"]), decode_scalar(s["radius"]), decode_scalar(s["eps"])
            )
        )
    return StageLedger(
        int(_require(data, "N", "ledger")),
        int(_require(data, "l2", "ledger")),
        int(_require(data, "mesh_denominator", "ledger")),
        model,
        tuple(stages),
        tuple(decode_vector(g) for g in _require(data, "nets", "ledger")),
    )


def ledger_hash(ledger) -> str:
    return content_hash(encode_ledger(ledger))


# -------------------------
# Certificates
# -------------------------
def encode_certificate(cert) -> dict:
    return {
        "kind": cert.kind.value,
        "bound": encode_bound(cert.bound),
        "verdict": cert.verdict,
        "exact": cert.exact,
        "N": cert.N,
        "ledger_hash": cert.ledger_hash,
        "parameters": cert.parameters,
        "witnesses": cert.witnesses,
    }


def decode_certificate(data):
    from src.experiments.certificates import Certificate, CertificateKind

    kind = _require(data, "kind", "certificate")
    try:
        kind = CertificateKind(kind)
    except ValueError:
        raise StructuralError(f"Unknown certificate kind {kind!r}")
    verdict = _require(data, "verdict", "certificate")
    if verdict not in ("pass", "fail"):
        raise StructuralError(f"Certificate verdict must be 'pass' or 'fail', got {verdict!r}")
    return Certificate(
        kind=kind,
        bound=decode_bound(_require(data, "bound", "certificate")),
        passed=verdict == "pass",
        parameters=data.get("parameters", {}),
        witnesses=data.get("witnesses", {}),
        N=data.get("N"),
        ledger_hash=data.get("ledger_hash"),
        exact=_strict_bool(data.get("exact", True), "certificate exact"),
    )


# -------------------------
# Experiment specs
# -------------------------
@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment to run: kind, kind-specific parameters and the suite seed."""

    kind: str
    parameters: dict = field(default_factory=dict)
    seed: Optional[int] = None


def encode_spec(spec: ExperimentSpec) -> dict:
    return {"kind": spec.kind, "parameters": spec.parameters, "seed": spec.seed}


def decode_spec(data) -> ExperimentSpec:
    if not isinstance(data, dict):
        raise SpecError("$", f"spec must be a JSON object, got {type(data).__name__}")
    kind = data.get("kind")
    if not isinstance(kind, str) or not kind:
        raise SpecError("kind", f"expected a non-empty string, got {kind!r}")
    parameters = data.get("parameters", {})
    if not isinstance(parameters, dict):
        raise SpecError("parameters", f"expected an object, got {type(parameters).__name__}")
    seed = data.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise SpecError("seed", f"expected an integer, got {seed!r}")
    unknown = sorted(set(data) - {"kind", "parameters", "seed"})
    if unknown:
        raise SpecError(unknown[0], "unknown top-level field")
    return ExperimentSpec(kind, parameters, seed)
