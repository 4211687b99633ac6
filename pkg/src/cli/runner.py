"""
Experiment driver: validate a spec, run it, collect certificates.

Each experiment kind has a parameter schema (name -> decoder, default).
Parameters are decoded against it before any computation starts, so a bad
spec fails fast with a SpecError naming the offending field.

Exit codes (config.py):
- EXIT_PASS:         every certificate passed
- EXIT_CERT_FAIL:    some certificate failed, a recheck disagreed, or a
                     witness search came up empty ("enlarge N")
- EXIT_SPEC_ERROR:   SpecError or any other input error
- EXIT_CAP_EXCEEDED: CapExceededError
"""

import logging
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from config import (
    DEFAULT_COMBO_ALPHA,
    DEFAULT_EPS,
    DEFAULT_EPS_PRIME,
    DEFAULT_GAMMA,
    DEFAULT_L2,
    DEFAULT_MESH_DENOMINATOR,
    DEFAULT_SEED,
    EXIT_CAP_EXCEEDED,
    EXIT_CERT_FAIL,
    EXIT_PASS,
    EXIT_SPEC_ERROR,
    LEMMA24_RANDOM_SAMPLES,
    MAX_CANDIDATE_SUMS,
    MAX_VERTICES,
    THM_SLICE_ALPHA,
)
from src.common.errors import CapExceededError, LabError, SearchFailure, SpecError, StructuralError, TruncationTooSmallError
from src.common.exact_lp import check_power, to_scalar
from src.common.protocol import (
    ExperimentSpec,
    content_hash,
    decode_functional,
    decode_model,
    decode_polytope,
    decode_vector,
    encode_bound,
    encode_certificate,
    encode_ledger,
    encode_polytope,
    encode_spec,
    encode_vector,
)
from src.common.seqspace import Functional
from src.experiments import instances
from src.experiments.certificates import SliceSpec
from src.experiments.lemmas import l1sum_combo_transfer, l1sum_inclusion_check, lemma24_check
from src.experiments.poulsen import exposing_functionals, k0_open_witness, k0_small_combo_search
from src.experiments.recheck import recheck
from src.experiments.renorming import thm_combo_Ui, thm_open_witness
from src.experiments.slices import prop21_certificate, prop21_exact_p1_certificate, slice_of
from src.geometry.constructions import (
    build_B_eps,
    build_stages,
    build_symmetric_K,
    solve_renorm_params,
)
from src.geometry.polytope import diameter, prune

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOptions:
    """Per-run overrides coming from the command line."""

    seed: Optional[int] = None
    cap_vertices: int = MAX_VERTICES
    cap_sums: int = MAX_CANDIDATE_SUMS
    timing: bool = False
    recheck: bool = False


@dataclass
class Report:
    """
    Outcome of one experiment.

    value is the headline number for experiments that produce artifacts
    rather than certificates (a diameter, a vertex count).
    """

    spec: ExperimentSpec
    certificates: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    value: Any = None
    rechecks: list = field(default_factory=list)
    timing: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates) and all(r["agrees"] for r in self.rechecks)


def encode_report(report: Report) -> dict:
    out = {
        "spec": encode_spec(report.spec),
        "certificates": [encode_certificate(c) for c in report.certificates],
        "artifacts": report.artifacts,
        "value": encode_bound(report.value) if report.value is not None else None,
        "rechecks": report.rechecks,
    }
    if report.timing is not None:
        out["timing"] = report.timing
    return out


def _artifact(data: dict) -> dict:
    return {"hash": content_hash(data), "data": data}


# -------------------------
# Parameter decoders
# -------------------------
_REQUIRED = object()


def _int(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise StructuralError(f"expected an integer, got {value!r}")
    return value


def _positive_int(value) -> int:
    value = _int(value)
    if value < 1:
        raise StructuralError(f"expected a positive integer, got {value}")
    return value


def _bool(value) -> bool:
    if not isinstance(value, bool):
        raise StructuralError(f"expected true or false, got {value!r}")
    return value


def _scalar(value) -> Fraction:
    if isinstance(value, float):
        raise StructuralError(f"floats are not exact; write {value!r} as a 'p/q' string")
    return to_scalar(value)


def _functionals(value) -> list:
    if not isinstance(value, list):
        raise StructuralError(f"expected a list of functionals, got {type(value).__name__}")
    return [decode_functional(f) for f in value]


def _slices(value) -> list:
    if not isinstance(value, list) or not value:
        raise StructuralError("expected a nonempty list of {functional, alpha, weight} objects")
    specs = []
    for item in value:
        if not isinstance(item, dict):
            raise StructuralError(f"slice must be an object, got {type(item).__name__}")
        specs.append(
            SliceSpec(
                decode_functional(item.get("functional")),
                _scalar(item.get("alpha")),
                _scalar(item.get("weight", 1)),
            )
        )
    return specs


_STAGES = {"N": (_positive_int, 3), "l2": (_positive_int, DEFAULT_L2), "q": (_positive_int, DEFAULT_MESH_DENOMINATOR)}

SCHEMAS = {
    "build_stages": {**_STAGES, "N": (_positive_int, _REQUIRED)},
    "ball": {**_STAGES, "eps": (_scalar, DEFAULT_EPS), "symmetric": (_bool, False)},
    "slice": {"body": (decode_polytope, _REQUIRED), "functional": (decode_functional, _REQUIRED), "alpha": (_scalar, _REQUIRED)},
    "diameter": {"body": (decode_polytope, _REQUIRED), "norm": (decode_model, None)},
    "prop21": {
        "p": (check_power, _REQUIRED),
        "eps_prime": (_scalar, DEFAULT_EPS_PRIME),
        "d_each": (_positive_int, None),
        "slices": (_slices, None),
        "count": (_positive_int, None),
        "exact": (_bool, False),
    },
    "k0_open": {
        **_STAGES,
        "center_index": (_positive_int, 1),
        "functionals": (_functionals, []),
        "radius": (_scalar, Fraction(1, 4)),
        "count": (_positive_int, None),
    },
    "k0_small_combo": {**_STAGES, "stage": (_positive_int, None), "alpha": (_scalar, DEFAULT_COMBO_ALPHA)},
    "thm_combo": {
        **_STAGES,
        "eps": (_scalar, DEFAULT_EPS),
        "gamma": (_scalar, DEFAULT_GAMMA),
        "stage": (_positive_int, None),
        "delta_tilde": (_scalar, THM_SLICE_ALPHA),
        "functionals": (_functionals, None),
    },
    "thm_open": {
        **_STAGES,
        "eps": (_scalar, DEFAULT_EPS),
        "functionals": (_functionals, None),
        "center": (decode_vector, None),
        "radius": (_scalar, None),
        "count": (_positive_int, None),
    },
    "lemma24": {
        "A": (decode_polytope, None),
        "B": (decode_polytope, None),
        "count": (_positive_int, None),
        "samples": (_int, LEMMA24_RANDOM_SAMPLES),
    },
    "l1sum_inclusion": {
        "B1": (decode_polytope, None),
        "B2": (decode_polytope, None),
        "functional": (decode_functional, None),
        "alpha": (_scalar, None),
        "mu": (_scalar, None),
        "count": (_positive_int, None),
    },
    "l1sum_combo_transfer": {
        "B1": (decode_polytope, _REQUIRED),
        "B2": (decode_polytope, _REQUIRED),
        "slices": (_slices, _REQUIRED),
        "mu": (_scalar, _REQUIRED),
    },
}

EXPERIMENT_KINDS = tuple(SCHEMAS)


def validate_parameters(spec: ExperimentSpec) -> dict:
    """
    Decode spec.parameters against the kind's schema.

    Raises:
        SpecError: unknown kind, unknown or missing parameter, or a value that fails to decode
    """
    schema = SCHEMAS.get(spec.kind)
    if schema is None:
        raise SpecError("kind", f"unknown experiment kind {spec.kind!r}; expected one of {', '.join(EXPERIMENT_KINDS)}")
    unknown = sorted(set(spec.parameters) - set(schema))
    if unknown:
        raise SpecError(f"parameters.{unknown[0]}", f"unknown parameter for {spec.kind}")
    values = {}
    for name, (decode, default) in schema.items():
        if name not in spec.parameters:
            if default is _REQUIRED:
                raise SpecError(f"parameters.{name}", "required")
            values[name] = default
            continue
        try:
            values[name] = decode(spec.parameters[name])
        except (TypeError, ValueError) as e:
            raise SpecError(f"parameters.{name}", str(e))
    _check_groups(spec.kind, values)
    return values


def _check_groups(kind: str, values: dict):
    """Parameters that only make sense together."""
    if kind == "prop21" and values["slices"] is not None and values["count"] is not None:
        raise SpecError("parameters.count", "cannot be combined with explicit slices")
    groups = {
        "lemma24": ("A", "B"),
        "l1sum_inclusion": ("B1", "B2", "functional", "alpha", "mu"),
        "thm_open": ("functionals", "center", "radius"),
    }
    names = groups.get(kind)
    if names is None:
        return
    given = [n for n in names if values[n] is not None]
    if given and len(given) != len(names):
        missing = next(n for n in names if values[n] is None)
        raise SpecError(f"parameters.{missing}", f"required together with {', '.join(given)}")
    if given and values.get("count") is not None:
        raise SpecError("parameters.count", f"cannot be combined with explicit {', '.join(names)}")


# -------------------------
# Experiment handlers
# -------------------------
def _ledger(values: dict):
    return build_stages(values["N"], values["l2"], values["q"])


def _run_build_stages(values, rng, options) -> Report:
    ledger = _ledger(values)
    result = diameter(ledger.K_N, ledger.model)
    return Report(None, artifacts={"ledger": _artifact(encode_ledger(ledger))}, value=result.value)


def _run_ball(values, rng, options) -> Report:
    ledger = _ledger(values)
    if values["symmetric"]:
        body = build_symmetric_K(ledger)
    else:
        body = build_B_eps(ledger, values["eps"], options.cap_vertices)
    return Report(None, artifacts={"ball": _artifact(encode_polytope(body))}, value=Fraction(len(body.vertices)))


def _run_slice(values, rng, options) -> Report:
    S = slice_of(values["body"], values["functional"], values["alpha"])
    return Report(None, artifacts={"slice": _artifact(encode_polytope(S))}, value=Fraction(len(S.vertices)))


def _run_diameter(values, rng, options) -> Report:
    body = prune(values["body"])
    result = diameter(body, values["norm"] or body.model)
    data = {"value": encode_bound(result.value), "pair": [encode_vector(v) for v in result.witness]}
    return Report(None, artifacts={"diameter": _artifact(data)}, value=result.value)


def _default_prop21_specs() -> tuple:
    """One slice of depth 1/2 around e_1* in the first factor, d_each = 2."""
    f = Functional(tuple(Fraction(c) for c in (1, 0, 0, 0)))
    return 2, [SliceSpec(f, Fraction(1, 2))]


def _run_prop21(values, rng, options) -> Report:
    p, eps_prime = values["p"], values["eps_prime"]
    if values["count"] is not None:
        combos = [instances.random_prop21_specs(rng) for _ in range(values["count"])]
    elif values["slices"] is not None:
        d_each = values["d_each"] or values["slices"][0].functional.dim // 2
        combos = [(d_each, values["slices"])]
    else:
        combos = [_default_prop21_specs()]
    certs = []
    for d_each, specs in combos:
        certs.append(prop21_certificate(p, specs, eps_prime, d_each))
        if values["exact"] and p == 1:
            certs.append(prop21_exact_p1_certificate(specs, d_each, sum_cap=options.cap_sums))
    return Report(None, certs)


def _run_k0_open(values, rng, options) -> Report:
    ledger = _ledger(values)
    if values["count"] is None:
        return Report(None, [k0_open_witness(ledger, values["center_index"], values["functionals"], values["radius"])])
    certs = []
    for _ in range(values["count"]):
        center_index, functionals, radius = instances.random_k0_neighbourhood(rng, ledger)
        certs.append(k0_open_witness(ledger, center_index, functionals, radius))
    return Report(None, certs)


def _run_k0_small_combo(values, rng, options) -> Report:
    ledger = _ledger(values)
    stage = values["stage"] or ledger.N - 1
    return Report(None, [k0_small_combo_search(ledger, stage, values["alpha"], sum_cap=options.cap_sums)])


def _run_thm_combo(values, rng, options) -> Report:
    ledger = _ledger(values)
    functionals = values["functionals"]
    if functionals is None:
        functionals = exposing_functionals(ledger, values["stage"] or ledger.N - 1)
    params = solve_renorm_params(values["eps"], values["gamma"], functionals, delta_tilde=values["delta_tilde"])
    ball = build_B_eps(ledger, values["eps"], options.cap_vertices)
    cert = thm_combo_Ui(ledger, params, ball=ball, sum_cap=options.cap_sums)
    return Report(None, [cert], artifacts={"ball": {"hash": content_hash(encode_polytope(ball))}})


def _run_thm_open(values, rng, options) -> Report:
    ledger = _ledger(values)
    eps = values["eps"]
    ball = build_B_eps(ledger, eps, options.cap_vertices)
    if values["center"] is not None:
        runs = [(values["functionals"], values["center"], values["radius"])]
    else:
        runs = [instances.random_thm_open_neighbourhood(rng, ledger, eps) for _ in range(values["count"] or 1)]
    certs = [thm_open_witness(ledger, eps, functionals, center, radius, ball=ball) for functionals, center, radius in runs]
    return Report(None, certs, artifacts={"ball": {"hash": content_hash(encode_polytope(ball))}})


def _run_lemma24(values, rng, options) -> Report:
    if values["A"] is not None:
        pairs = [(values["A"], values["B"])]
    else:
        pairs = [instances.random_lemma24_instance(rng) for _ in range(values["count"] or 1)]
    certs = [lemma24_check(A, B, seed=rng.randrange(2 ** 32), random_samples=values["samples"]) for A, B in pairs]
    return Report(None, certs)


def _run_l1sum_inclusion(values, rng, options) -> Report:
    if values["B1"] is not None:
        runs = [tuple(values[n] for n in ("B1", "B2", "functional", "alpha", "mu"))]
    else:
        runs = [instances.random_l1sum_instance(rng) for _ in range(values["count"] or 1)]
    return Report(None, [l1sum_inclusion_check(*run) for run in runs])


def _run_l1sum_combo_transfer(values, rng, options) -> Report:
    cert = l1sum_combo_transfer(
        values["B1"], values["B2"], values["slices"], values["mu"], sum_cap=options.cap_sums
    )
    return Report(None, [cert])


_HANDLERS: dict = {
    "build_stages": _run_build_stages,
    "ball": _run_ball,
    "slice": _run_slice,
    "diameter": _run_diameter,
    "prop21": _run_prop21,
    "k0_open": _run_k0_open,
    "k0_small_combo": _run_k0_small_combo,
    "thm_combo": _run_thm_combo,
    "thm_open": _run_thm_open,
    "lemma24": _run_lemma24,
    "l1sum_inclusion": _run_l1sum_inclusion,
    "l1sum_combo_transfer": _run_l1sum_combo_transfer,
}


def run_experiment(spec: ExperimentSpec, options: RunOptions = RunOptions()) -> Report:
    """
    Validate and execute one experiment.

    The suite seed is options.seed, then spec.seed, then DEFAULT_SEED; the
    report echoes the spec with the seed actually used.

    Raises:
        SpecError: the spec fails validation
        CapExceededError: a computation cap was hit
    """
    values = validate_parameters(spec)
    seed = options.seed if options.seed is not None else (spec.seed if spec.seed is not None else DEFAULT_SEED)
    spec = ExperimentSpec(spec.kind, spec.parameters, seed)
    handler: Callable = _HANDLERS[spec.kind]

    start = time.perf_counter()
    report = handler(values, random.Random(seed), options)
    elapsed = time.perf_counter() - start
    report.spec = spec
    logger.info("%s: %d certificate(s) in %.2fs", spec.kind, len(report.certificates), elapsed)

    if options.recheck:
        for cert in report.certificates:
            result = recheck(cert)
            report.rechecks.append(
                {"kind": cert.kind.value, "agrees": result.agrees(cert), "checks": result.checks}
            )
    if options.timing:
        report.timing = {"seconds": round(elapsed, 3)}
    return report


def exit_code_for(reports: list) -> int:
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_CERT_FAIL


def exit_code_for_error(exc: LabError) -> int:
    if isinstance(exc, CapExceededError):
        return EXIT_CAP_EXCEEDED
    if isinstance(exc, (SearchFailure, TruncationTooSmallError)):
        return EXIT_CERT_FAIL
    return EXIT_SPEC_ERROR
