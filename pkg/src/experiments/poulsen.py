"""
Both halves of the Poulsen-type set K_N.

k0_open_witness: every basic weak neighbourhood whose functionals live on
  the first m_{N-1} coordinates contains a net point g_i together with its
  bump g_i + e_{m_{N-1}+i}; the two are at sup distance 1 = diam(K_N).

k0_small_combo_search: equal-weight averages of slices exposing the bump
  vertices of one stage are measured exactly. The measurement is recorded,
  and the certificate passes when it is strictly below diam(K_N) = 1.
"""

import logging
from fractions import Fraction
from typing import Sequence

from config import DEFAULT_COMBO_ALPHA, MAX_CANDIDATE_SUMS
from src.common.errors import PreconditionError, SearchFailure
from src.common.exact_lp import to_scalar
from src.common.protocol import encode_functional, encode_polytope, encode_scalar, encode_vector, ledger_hash
from src.common.seqspace import Functional, SeqVector, basis_functional, pair, sup_norm
from src.experiments.certificates import Certificate, CertificateKind
from src.experiments.slices import slice_of
from src.geometry.constructions import StageLedger
from src.geometry.polytope import combo_diameter, contains, diameter, support

logger = logging.getLogger(__name__)


def _check_low_support(functionals: Sequence[Functional], dim: int, top: int):
    for j, f in enumerate(functionals):
        if f.dim != dim:
            raise PreconditionError(f"functional {j} has {f.dim} coefficients, the ledger has {dim}")
        high = [k for k in f.support() if k > top]
        if high:
            raise PreconditionError(f"functional {j} uses coordinate {high[0]} above m_(N-1) = {top}")


def in_neighbourhood(functionals: Sequence[Functional], center: SeqVector, radius: Fraction, x: SeqVector) -> bool:
    """x in {y : |f_j(y - center)| < radius for every j}."""
    diff = x - center
    return all(abs(pair(f, diff)) < radius for f in functionals)


def k0_open_witness(
    ledger: StageLedger,
    center_index: int,
    functionals: Sequence[Functional],
    radius,
) -> Certificate:
    """
    Witness pair at sup distance 1 inside U = {x : |f_j(x - g_center)| < radius}.

    Raises:
        PreconditionError: a functional reaches above m_(N-1), radius <= 0
        SearchFailure: no net point of stage N-1 lies in U
    """
    radius = to_scalar(radius)
    if radius <= 0:
        raise PreconditionError(f"radius must be positive, got {radius}")
    N = ledger.N
    prev = ledger.stage(N - 1)
    _check_low_support(functionals, ledger.model.dim, prev.m)
    if not 1 <= center_index <= len(ledger.nets):
        raise PreconditionError(f"center index {center_index} outside 1..{len(ledger.nets)}")
    center = ledger.nets[center_index - 1]

    found = None
    for i in range(1, prev.l + 1):
        if in_neighbourhood(functionals, center, radius, ledger.nets[i - 1]):
            found = i
            break
    if found is None:
        raise SearchFailure(f"No net point g_1..g_{prev.l} lies in U; enlarge N")

    g = ledger.nets[found - 1]
    bump = ledger.bump(N - 1, found)
    K = ledger.K_N
    distance = sup_norm((bump - g).point(ledger.model))
    checks = {
        "g_in_U": in_neighbourhood(functionals, center, radius, g),
        "bump_in_U": in_neighbourhood(functionals, center, radius, bump),
        "g_in_K": contains(K, g),
        "bump_in_K": contains(K, bump),
        "distance_is_one": distance == 1,
        "diam_K_is_one": diameter(K, ledger.model).value == 1,
    }
    logger.info("k0 open witness: i=%d, checks %s", found, checks)
    return Certificate(
        kind=CertificateKind.K0_OPEN_DIAMETER,
        bound=distance,
        passed=all(checks.values()),
        parameters={"center_index": center_index, "radius": encode_scalar(radius), "functionals": len(functionals)},
        witnesses={
            "i": found,
            "center": encode_vector(center),
            "functionals": [encode_functional(f) for f in functionals],
            "pair": [encode_vector(g), encode_vector(bump)],
            "K": encode_polytope(K),
            "checks": checks,
        },
        N=N,
        ledger_hash=ledger_hash(ledger),
    )


def exposing_functionals(ledger: StageLedger, stage: int) -> list:
    """(e_1* + e_{m_n+i}*) / sup over K_N, one per bump vertex of stage n + 1."""
    if not 1 <= stage < ledger.N:
        raise PreconditionError(f"stage must satisfy 1 <= n < N = {ledger.N}, got {stage}")
    record = ledger.stage(stage)
    out = []
    for i in range(1, record.l + 1):
        f = basis_functional(ledger.model, 1) + basis_functional(ledger.model, record.m + i)
        out.append(f.scale(1 / support(ledger.K_N, f)))
    return out


def stage_slices(ledger: StageLedger, stage: int, alpha) -> tuple:
    """(functionals, closed slices of K_N) for every bump vertex of the stage."""
    functionals = exposing_functionals(ledger, stage)
    return functionals, [slice_of(ledger.K_N, f, alpha) for f in functionals]


def k0_small_combo_search(
    ledger: StageLedger, stage: int, alpha=DEFAULT_COMBO_ALPHA, sum_cap: int = MAX_CANDIDATE_SUMS
) -> Certificate:
    """Exact sup-diameter of the equal-weight average of the stage's exposing slices."""
    alpha = to_scalar(alpha)
    functionals, slices = stage_slices(ledger, stage, alpha)
    weight = Fraction(1, len(slices))
    result = combo_diameter([(weight, S) for S in slices], ledger.model, sum_cap=sum_cap)
    logger.info("k0 small combo: stage %d, alpha %s, diameter %s", stage, alpha, result.value)
    return Certificate(
        kind=CertificateKind.K0_SMALL_COMBO,
        bound=result.value,
        passed=result.value < 1,
        parameters={"stage": stage, "alpha": encode_scalar(alpha), "slices": len(slices)},
        witnesses={
            "functionals": [encode_functional(f) for f in functionals],
            "weights": [encode_scalar(weight)] * len(slices),
            "slices": [encode_polytope(S) for S in slices],
            "exposed": [encode_vector(ledger.bump(stage, i)) for i in range(1, len(slices) + 1)],
            "K": encode_polytope(ledger.K_N),
            "pair": [encode_vector(result.witness[0]), encode_vector(result.witness[1])],
        },
        N=ledger.N,
        ledger_hash=ledger_hash(ledger),
    )
