"""
Set identities used along the way.

lemma24_check: if (A - A)/2 lies in B then
    co(A U -A U B) = co(A U B) U co(-A U B)

l1sum_inclusion_check: in Z = X (+)_1 Y, for 0 < mu < alpha and ||x*|| = 1,
    S(B_Z, (x*, 0), mu) is inside S(B_X, x*, alpha) x mu B_Y

l1sum_combo_transfer: consequently a combination of slices of B_X lifts to
a combination of slices of B_Z whose diameter grows by at most 2 mu.
"""

import itertools
import logging
import random
from fractions import Fraction
from typing import Sequence

from config import DEFAULT_SEED, LEMMA24_RANDOM_SAMPLES, MAX_CANDIDATE_SUMS
from src.common.errors import CapExceededError, PreconditionError, StructuralError
from src.common.exact_lp import to_scalar
from src.common.protocol import encode_functional, encode_polytope, encode_scalar, encode_vector
from src.common.seqspace import Functional, SeqVector, gauge_model, pair
from src.experiments.certificates import Certificate, CertificateKind, SliceSpec, check_combination
from src.experiments.slices import slice_of
from src.geometry.constructions import build_l1_sum_ball, split_vector
from src.geometry.polytope import (
    VPolytope,
    combo_diameter,
    contains,
    convex_weights,
    gauge,
    hull_of,
    in_hull,
    prune,
    support,
)

logger = logging.getLogger(__name__)


# -------------------------
# co(A U -A U B) = co(A U B) U co(-A U B)
# -------------------------
def _check_half_differences(A: VPolytope, B: VPolytope):
    for a, b in itertools.product(A.vertices, repeat=2):
        half = (a - b).scale(Fraction(1, 2))
        if not contains(B, half):
            raise PreconditionError(f"(a - a')/2 = {half.point(A.model)} is not in B for a={a.coords}, a'={b.coords}")


def _samples(left: VPolytope, rng: random.Random, count: int) -> list:
    """Vertices, pairwise midpoints, then seeded random convex combinations."""
    points = list(left.vertices)
    for v, w in itertools.combinations(left.vertices, 2):
        points.append((v + w).scale(Fraction(1, 2)))
    for _ in range(count):
        raw = [rng.randint(0, 4) for _ in left.vertices]
        if not any(raw):
            raw[0] = 1
        total = sum(raw)
        x = None
        for r, v in zip(raw, left.vertices):
            if r:
                term = v.scale(Fraction(r, total))
                x = term if x is None else x + term
        points.append(x)
    return points


def decompose(A: VPolytope, B: VPolytope, x: SeqVector) -> dict:
    """
    Re-derive x = (l1 - l2) a1 + 2 l2 (a1 - a2)/2 + l3 b for x in co(A U -A U B).

    Returns the pieces and whether they reproduce x; when l1 < l2 the roles
    of A and -A swap.
    """
    gens = list(A.vertices) + [-a for a in A.vertices] + list(B.vertices)
    weights = convex_weights(VPolytope(A.model, tuple(gens)), x)
    if weights is None:
        raise PreconditionError("decompose: point is outside co(A U -A U B)")
    nA = len(A.vertices)
    wA, wM, wB = weights[:nA], weights[nA : 2 * nA], weights[2 * nA :]
    l1, l2, l3 = sum(wA, Fraction(0)), sum(wM, Fraction(0)), sum(wB, Fraction(0))

    def mean(ws, vs):
        total = sum(ws, Fraction(0))
        acc = None
        for w, v in zip(ws, vs):
            if w:
                acc = v.scale(w / total) if acc is None else acc + v.scale(w / total)
        return acc

    a1 = mean(wA, A.vertices) if l1 else None
    a2 = mean(wM, A.vertices) if l2 else None
    b = mean(wB, B.vertices) if l3 else None
    rebuilt = x - x
    half_ok = True
    if l1 >= l2:
        side = "A"
        if l1 > l2:
            rebuilt = rebuilt + a1.scale(l1 - l2)
    else:
        # x = (l2 - l1)(-a2) + 2 l1 (a1 - a2)/2 + l3 b
        side = "-A"
        rebuilt = rebuilt - a2.scale(l2 - l1)
    if l1 and l2:
        half = (a1 - a2).scale(Fraction(1, 2))
        half_ok = contains(B, half)
        rebuilt = rebuilt + half.scale(2 * min(l1, l2))
    if b is not None:
        rebuilt = rebuilt + b.scale(l3)
    return {
        "lambdas": [encode_scalar(l1), encode_scalar(l2), encode_scalar(l3)],
        "side": side,
        "a1": encode_vector(a1) if a1 is not None else None,
        "a2": encode_vector(a2) if a2 is not None else None,
        "b": encode_vector(b) if b is not None else None,
        "reproduces": rebuilt == x,
        "half_difference_in_B": half_ok,
    }


def lemma24_check(
    A: VPolytope,
    B: VPolytope,
    seed: int = DEFAULT_SEED,
    random_samples: int = LEMMA24_RANDOM_SAMPLES,
) -> Certificate:
    """
    Check co(A U -A U B) = co(A U B) U co(-A U B) on vertices and samples.

    Raises:
        PreconditionError: (A - A)/2 is not inside B
    """
    if A.model.dim != B.model.dim or A.model.has_limit != B.model.has_limit:
        raise StructuralError("lemma24_check needs A and B in the same model")
    A, B = prune(A), prune(B)
    _check_half_differences(A, B)
    model = A.model
    minus_A = [-a for a in A.vertices]
    left = hull_of(model, list(A.vertices) + minus_A + list(B.vertices))
    R1 = [v.point(model) for v in list(A.vertices) + list(B.vertices)]
    R2 = [v.point(model) for v in minus_A + list(B.vertices)]

    rng = random.Random(seed)
    samples = _samples(left, rng, random_samples)
    sides = []
    for x in samples:
        p = x.point(model)
        sides.append("A" if in_hull(R1, p) else ("-A" if in_hull(R2, p) else "none"))

    right_in_left = all(contains(left, v) for v in list(A.vertices) + minus_A + list(B.vertices))
    point = samples[-1] if random_samples else samples[0]
    decomposition = decompose(A, B, point)
    checks = {
        "left_in_union": all(s != "none" for s in sides),
        "right_in_left": right_in_left,
        "decomposition_reproduces": decomposition["reproduces"],
        "half_difference_in_B": decomposition["half_difference_in_B"],
    }
    return Certificate(
        kind=CertificateKind.LEMMA24_EQUALITY,
        bound=Fraction(len(samples)),
        passed=all(checks.values()),
        parameters={"dim": model.dim, "A_vertices": len(A.vertices), "B_vertices": len(B.vertices), "seed": seed},
        witnesses={
            "A": encode_polytope(A),
            "B": encode_polytope(B),
            "left": encode_polytope(left),
            "samples": [encode_vector(x) for x in samples],
            "sides": sides,
            "decomposition": {"point": encode_vector(point), **decomposition},
            "checks": checks,
        },
    )


# -------------------------
# l1-sum slices
# -------------------------
def _normalised(B1: VPolytope, f: Functional) -> tuple:
    s = support(B1, f)
    if s <= 0:
        raise PreconditionError(f"functional has non-positive sup {s} over B1")
    return f.scale(1 / s), s


def _lift_first(f: Functional, d2: int) -> Functional:
    return Functional(f.coeffs + (Fraction(0),) * d2)


def l1sum_inclusion_check(B1: VPolytope, B2: VPolytope, f: Functional, alpha, mu) -> Certificate:
    """
    Check every vertex (x, y) of the closed slice S(B_Z, (f, 0), mu):
    f(x) > 1 - alpha, x in B1 and gauge_B2(y) <= mu.

    Raises:
        PreconditionError: mu >= alpha or mu <= 0
    """
    alpha, mu = to_scalar(alpha), to_scalar(mu)
    if not 0 < mu < alpha:
        raise PreconditionError(f"need 0 < mu < alpha, got mu={mu}, alpha={alpha}")
    if f.dim != B1.model.dim:
        raise StructuralError(f"functional has {f.dim} coefficients, B1 has dim {B1.model.dim}")
    B1, B2 = prune(B1), prune(B2)
    Z = build_l1_sum_ball(B1, B2)
    fn, scale = _normalised(B1, f)
    S = slice_of(Z, _lift_first(fn, B2.model.dim), mu)

    rows = []
    for v in S.vertices:
        x, y = split_vector(Z, v)
        fx = pair(fn, x)
        gx = gauge(B1, x)
        gy = gauge(B2, y)
        rows.append(
            {
                "vertex": encode_vector(v),
                "f_x": encode_scalar(fx),
                "gauge_x": encode_scalar(gx),
                "gauge_y": encode_scalar(gy),
                "ok": fx > 1 - alpha and gx <= 1 and gy <= mu,
            }
        )
    passed = all(r["ok"] for r in rows)
    logger.info("l1sum inclusion: %d slice vertices, pass=%s", len(rows), passed)
    return Certificate(
        kind=CertificateKind.L1SUM_INCLUSION,
        bound=mu,
        passed=passed,
        parameters={
            "alpha": encode_scalar(alpha),
            "mu": encode_scalar(mu),
            "d1": B1.model.dim,
            "d2": B2.model.dim,
        },
        witnesses={
            "B1": encode_polytope(B1),
            "B2": encode_polytope(B2),
            "functional": encode_functional(fn),
            "scale": encode_scalar(scale),
            "vertices": rows,
        },
    )


def l1sum_combo_transfer(
    B1: VPolytope, B2: VPolytope, specs: Sequence[SliceSpec], mu, sum_cap: int = MAX_CANDIDATE_SUMS
) -> Certificate:
    """
    Certify diam_Z(sum lam_i S(B_Z, (f_i, 0), mu)) <= diam_B1(sum lam_i S(B1, f_i, alpha_i)) + 2 mu.

    Functionals are normalised to sup 1 over B1 (depths scale with them).

    Raises:
        PreconditionError: mu not below every normalised depth
        CapExceededError: the factor combination is too large to measure exactly
    """
    mu = to_scalar(mu)
    check_combination(specs)
    B1, B2 = prune(B1), prune(B2)
    Z = build_l1_sum_ball(B1, B2)
    d2 = B2.model.dim

    factor_parts, lifted_parts, normalised, depths = [], [], [], []
    for spec in specs:
        fn, scale = _normalised(B1, spec.functional)
        depth = spec.alpha / scale
        normalised.append(fn)
        depths.append(depth)
        factor_parts.append((spec.weight, slice_of(B1, fn, depth)))
        lifted_parts.append((spec.weight, slice_of(Z, _lift_first(fn, d2), mu)))
    if not 0 < mu < min(depths):
        raise PreconditionError(f"need 0 < mu < every normalised depth, got mu={mu}, depths {[str(d) for d in depths]}")

    factor = combo_diameter(factor_parts, gauge_model(B1), sum_cap=sum_cap)
    if not factor.exact:
        raise CapExceededError("cap_sums", "factor combination too large for an exact diameter")
    lifted = combo_diameter(lifted_parts, gauge_model(Z), sum_cap=sum_cap)
    bound = factor.value + 2 * mu
    return Certificate(
        kind=CertificateKind.L1SUM_COMBO_TRANSFER,
        bound=bound,
        passed=lifted.value <= bound,
        parameters={"mu": encode_scalar(mu), "slices": len(specs), "d1": B1.model.dim, "d2": d2},
        witnesses={
            "B1": encode_polytope(B1),
            "B2": encode_polytope(B2),
            "functionals": [encode_functional(fn) for fn in normalised],
            "depths": [encode_scalar(d) for d in depths],
            "weights": [encode_scalar(spec.weight) for spec in specs],
            "factor_diameter": encode_scalar(factor.value),
            "lifted_diameter": encode_scalar(lifted.value),
            "lifted_exact": lifted.exact,
            "factor_pair": [encode_vector(v) for v in factor.witness],
            "lifted_pair": [encode_vector(v) for v in lifted.witness],
        },
        exact=lifted.exact,
    )
