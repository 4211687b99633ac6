"""
The renormed ball B_eps: small combinations of slices next to weak
neighbourhoods of diameter 2, certified on one body.

thm_combo_Ui builds the closed versions of
    U_i = {x in B_eps : x_i*(x) > 2(1 - delta - x_i*(1/2)) + rho ||x_i*|| / 2,  L(x) < -1 + rho^2}
and bounds the gauge-diameter of their average by gamma.

thm_open_witness exhibits, inside a weak neighbourhood, the pair
    x = lam (2(g_i + e_k) - 1) + (1 - lam) [(1 - eps) x_k + eps (y0 + e_k)]
    y = lam (2 g_i - 1)        + (1 - lam) [(1 - eps) y_k + eps (y0 - e_k)]
with x - y = 2 e_k and ||2 e_k||_eps = 2.
"""

import logging
from fractions import Fraction
from typing import Optional, Sequence

from config import EXACT_COMBO_CAP, MAX_CANDIDATE_SUMS, WITNESS_LAMBDAS
from src.common.errors import PreconditionError, SearchFailure
from src.common.exact_lp import GE, LE, LpProblem, solve_lp, to_scalar
from src.common.protocol import (
    encode_functional,
    encode_polytope,
    encode_scalar,
    encode_vector,
    ledger_hash,
)
from src.common.seqspace import (
    Functional,
    SeqVector,
    basis_vector,
    bump_sequences,
    c_model,
    gauge_model,
    limit_functional,
    pair,
    zero_vector,
)
from src.experiments.certificates import Certificate, CertificateKind
from src.experiments.poulsen import _check_low_support, in_neighbourhood
from src.experiments.slices import slice_of
from src.geometry.constructions import (
    BallGenerators,
    RenormParams,
    StageLedger,
    b_eps_generators,
    functional_norm,
)
from src.geometry.polytope import (
    HalfSpace,
    VPolytope,
    clip,
    combo_diameter,
    contains,
    convex_weights,
    gauge,
    hull_of,
    in_hull,
    support,
)

logger = logging.getLogger(__name__)


def lift_to_ball(v: SeqVector) -> SeqVector:
    """2(v - 1/2) for a K-vector (limit 0), landing at L = -1."""
    return SeqVector(tuple(2 * c - 1 for c in v.coords), Fraction(-1))


def u_threshold(f: Functional, params: RenormParams) -> Fraction:
    """2(1 - delta - f(1/2)) + rho ||f|| / 2."""
    half = sum(f.coeffs, Fraction(0)) / 2 + f.limit_coeff / 2
    return 2 * (1 - params.delta - half) + params.rho * functional_norm(f) / 2


def min_A_weight(gens: BallGenerators, x: SeqVector) -> Optional[Fraction]:
    """Smallest total weight on the A family over all representations of x."""
    model = c_model(x.dim)
    body = VPolytope(model, tuple(gens.all()))
    objective = [Fraction(1)] * len(gens.A) + [Fraction(0)] * (len(gens.minus_A) + len(gens.box))
    weights = convex_weights(body, x, objective=objective, maximize=False)
    if weights is None:
        return None
    return sum(weights[: len(gens.A)], Fraction(0))


def closed_u_sets(ball: VPolytope, params: RenormParams) -> list:
    """Closed U_i: clip by the functional first, then by the limit cap."""
    model = ball.model
    cap = -1 + params.rho ** 2
    limit_cap = HalfSpace(limit_functional(model), cap, LE)
    out = []
    for j, f in enumerate(params.functionals):
        U = clip(ball, HalfSpace(f, u_threshold(f, params), GE))
        U = clip(U, limit_cap) if U is not None else None
        if U is None:
            raise PreconditionError(f"closed U_{j + 1} is empty")
        out.append(U)
    return out


def thm_combo_Ui(
    ledger: StageLedger,
    params: RenormParams,
    ball: Optional[VPolytope] = None,
    exact_cap: int = EXACT_COMBO_CAP,
    sum_cap: int = MAX_CANDIDATE_SUMS,
) -> Certificate:
    """
    Certify that the average of the closed U_i has gauge-diameter at most gamma.

    Base slices S_i = {x in K_N : x_i*(x) >= 1 - delta_tilde} must average to
    sup-diameter below (1 - eps) gamma / 4. When the U_i have more than
    exact_cap vertex choices the reported diameter is the sum-of-diameters
    upper bound and parameters["diameter_method"] says so.

    Raises:
        PreconditionError: functionals not normalised on K_N, base average too wide, empty U_i
        SearchFailure: no 2(g - 1/2) witness found for some U_i
    """
    gens = b_eps_generators(ledger, params.eps)
    if ball is None:
        ball = hull_of(c_model(ledger.model.dim), gens.all())
    K = ledger.K_N

    for j, f in enumerate(params.functionals):
        if f.dim != ledger.model.dim or f.limit_coeff:
            raise PreconditionError(f"functional {j + 1} must act on the {ledger.model.dim} K-coordinates")
        if support(K, f) != 1:
            raise PreconditionError(f"functional {j + 1} has sup {support(K, f)} over K_N, expected 1")
    base = combo_diameter(
        [(w, slice_of(K, f, params.delta_tilde)) for w, f in zip(params.weights, params.functionals)],
        ledger.model,
        sum_cap=sum_cap,
    )
    base_limit = (1 - params.eps) * params.gamma / 4
    if not base.value < base_limit:
        raise PreconditionError(f"base slices average to diameter {base.value}, need < {base_limit}")

    U_sets = closed_u_sets(ball, params)
    candidates = list(ledger.nets) + list(K.vertices)
    witnesses, lambda_mins = [], []
    lam_floor = 1 - params.rho / 2
    for j, (f, U) in enumerate(zip(params.functionals, U_sets)):
        thr = u_threshold(f, params)
        chosen = None
        for g in candidates:
            x = lift_to_ball(g)
            if pair(f, x) > thr:
                chosen = x
                break
        if chosen is None:
            raise SearchFailure(f"No point 2(g - 1/2) lies in U_{j + 1}; enlarge N")
        witnesses.append(chosen)
        lambda_mins.append(min(min_A_weight(gens, v) for v in (chosen,) + U.vertices))

    result = combo_diameter(
        list(zip(params.weights, U_sets)), gauge_model(ball), exact_cap=exact_cap, sum_cap=sum_cap
    )
    eps = params.eps
    analytic = 2 / (1 - eps) * base.value + (7 - 2 * eps) / (2 * (1 - eps)) * params.rho
    checks = {
        "witnesses_in_ball": all(contains(ball, x) for x in witnesses),
        "lambda_above_floor": all(m is not None and m > lam_floor for m in lambda_mins),
        "diameter_within_gamma": result.value <= params.gamma,
    }
    logger.info("thm combo: diameter %s (exact=%s), analytic bound %s", result.value, result.exact, analytic)
    return Certificate(
        kind=CertificateKind.THM_COMBO_UPPER,
        bound=result.value,
        passed=all(checks.values()),
        parameters={
            "eps": encode_scalar(eps),
            "gamma": encode_scalar(params.gamma),
            "rho": encode_scalar(params.rho),
            "delta": encode_scalar(params.delta),
            "delta_tilde": encode_scalar(params.delta_tilde),
            "slices": len(params.functionals),
            "diameter_method": "exact" if result.exact else "sum_of_diameters",
        },
        witnesses={
            "ball": encode_polytope(ball),
            "K": encode_polytope(K),
            "A": [encode_vector(a) for a in gens.A],
            "functionals": [encode_functional(f) for f in params.functionals],
            "weights": [encode_scalar(w) for w in params.weights],
            "thresholds": [encode_scalar(u_threshold(f, params)) for f in params.functionals],
            "limit_cap": encode_scalar(-1 + params.rho ** 2),
            "U": [encode_polytope(U) for U in U_sets],
            "nonempty": [encode_vector(x) for x in witnesses],
            "lambda_min": [encode_scalar(m) for m in lambda_mins],
            "base_diameter": encode_scalar(base.value),
            "analytic_bound": encode_scalar(analytic),
            "pair": [encode_vector(result.witness[0]), encode_vector(result.witness[1])],
            "checks": checks,
        },
        N=ledger.N,
        ledger_hash=ledger_hash(ledger),
        exact=result.exact,
    )


def _box_base_point(
    ledger: StageLedger,
    eps: Fraction,
    functionals: Sequence[Functional],
    center: SeqVector,
    radius: Fraction,
    i: int,
) -> Optional[tuple]:
    """
    (i, lam, b) with z = lam (2 g_i - 1) + (1 - lam) b strictly inside U, or None.

    b ranges over the box {||u||_inf <= 1, |L(u)| <= 1 - eps} with b(k) = 0 at
    k = m_(N-1) + i. The LP runs on w = (1 - lam) b and maximises the slack t
    left below the radius by every |f_j(z - center)|.
    """
    k = ledger.stage(ledger.N - 1).m + i
    a = lift_to_ball(ledger.nets[i - 1])
    cols = [c for c in range(1, ledger.model.dim + 1) if c != k]
    n = len(cols) + 3  # lam, w_c for c != k, w_L, t
    top = 1 - eps
    matrix, senses, rhs = [], [], []

    def add(row: list, bound: Fraction):
        matrix.append(row)
        senses.append(LE)
        rhs.append(bound)

    for j in range(len(cols)):
        for s in (1, -1):
            row = [Fraction(0)] * n
            row[0], row[1 + j] = Fraction(1), Fraction(s)
            add(row, Fraction(1))
    for s in (1, -1):
        row = [Fraction(0)] * n
        row[0], row[-2] = top, Fraction(s)
        add(row, top)
    for f in functionals:
        shift = pair(f, center)
        value = [pair(f, a)] + [f.coeffs[c - 1] for c in cols] + [f.limit_coeff]
        for s in (1, -1):
            add([s * v for v in value] + [Fraction(1)], radius + s * shift)

    bounds = [(0, 1)] + [(None, None)] * (len(cols) + 1) + [(0, radius)]
    result = solve_lp(LpProblem([0] * (n - 1) + [1], matrix, senses, rhs, bounds, maximize=True))
    if not result.is_optimal or result.optimum <= 0:
        return None
    lam = result.assignment[0]
    if lam == 1:
        return i, lam, zero_vector(c_model(ledger.model.dim))
    w = dict(zip(cols, result.assignment[1:-2]))
    coords = tuple(w.get(c, Fraction(0)) / (1 - lam) for c in range(1, ledger.model.dim + 1))
    b = SeqVector(coords, result.assignment[-2] / (1 - lam))
    logger.debug("thm open: box base point for i=%d at lam=%s, slack %s", i, lam, result.optimum)
    return i, lam, b


def thm_open_witness(
    ledger: StageLedger,
    eps,
    functionals: Sequence[Functional],
    center: SeqVector,
    radius,
    ball: Optional[VPolytope] = None,
    base: Optional[tuple] = None,
) -> Certificate:
    """
    Pair x, y in U = {z : |f_j(z - center)| < radius} with ||x - y||_eps = 2.

    Args:
        base: (i, lam) to force the base point lam (2 g_i - 1). Otherwise the lam
            grid is tried first, then an exact LP over lam (2 g_i - 1) + (1 - lam) b
            with b in the box

    Raises:
        PreconditionError: a functional reaches above m_(N-1)
        SearchFailure: no base point lam (2 g_i - 1) + (1 - lam) b lies in U
    """
    eps, radius = to_scalar(eps), to_scalar(radius)
    if radius <= 0:
        raise PreconditionError(f"radius must be positive, got {radius}")
    gens = b_eps_generators(ledger, eps)
    model = c_model(ledger.model.dim)
    if ball is None:
        ball = hull_of(model, gens.all())
    prev = ledger.stage(ledger.N - 1)
    _check_low_support(functionals, model.dim, prev.m)

    options = [base] if base is not None else [(i, lam) for i in range(1, prev.l + 1) for lam in WITNESS_LAMBDAS]
    found = None
    for i, lam in options:
        lam = to_scalar(lam)
        if in_neighbourhood(functionals, center, radius, lift_to_ball(ledger.nets[i - 1]).scale(lam)):
            found = (i, lam, zero_vector(model))
            break
    if found is None and base is None:
        for i in range(1, prev.l + 1):
            found = _box_base_point(ledger, eps, functionals, center, radius, i)
            if found is not None:
                break
    if found is None:
        raise SearchFailure("No base point lam (2 g_i - 1) + (1 - lam) b lies in U; enlarge N")
    i, lam, b = found

    k = prev.m + i
    e_k = basis_vector(model, k)
    g = ledger.nets[i - 1]
    z = lift_to_ball(g).scale(lam) + b.scale(1 - lam)
    x0 = SeqVector(b.coords, b.limit / (1 - eps))
    y0 = SeqVector(b.coords, Fraction(0))
    x_k, y_k = bump_sequences(x0, k)
    a_x = lift_to_ball(g + basis_vector(ledger.model, k))
    a_y = lift_to_ball(g)
    b_x = x_k.scale(1 - eps) + (y0 + e_k).scale(eps)
    b_y = y_k.scale(1 - eps) + (y0 - e_k).scale(eps)
    x = a_x.scale(lam) + b_x.scale(1 - lam)
    y = a_y.scale(lam) + b_y.scale(1 - lam)

    plus_side = [v.point(model) for v in gens.A + gens.box]
    minus_side = [v.point(model) for v in gens.minus_A + gens.box]
    sides = {}
    for name, point in (("base", z), ("x", x), ("y", y)):
        p = point.point(model)
        sides[name] = "A" if in_hull(plus_side, p) else ("-A" if in_hull(minus_side, p) else "none")

    distance = gauge(ball, x - y)
    checks = {
        "difference_is_2e_k": x - y == e_k.scale(2),
        "x_in_U": in_neighbourhood(functionals, center, radius, x),
        "y_in_U": in_neighbourhood(functionals, center, radius, y),
        "x_in_ball": contains(ball, x),
        "y_in_ball": contains(ball, y),
        "gauge_is_two": distance == 2,
        "sides_found": all(s != "none" for s in sides.values()),
    }
    logger.info("thm open witness: i=%d, lam=%s, k=%d, gauge %s", i, lam, k, distance)
    return Certificate(
        kind=CertificateKind.THM_OPEN_DIAMETER,
        bound=distance,
        passed=all(checks.values()),
        parameters={"eps": encode_scalar(eps), "radius": encode_scalar(radius), "functionals": len(functionals)},
        witnesses={
            "ball": encode_polytope(ball),
            "center": encode_vector(center),
            "functionals": [encode_functional(f) for f in functionals],
            "i": i,
            "lambda": encode_scalar(lam),
            "k": k,
            "base": encode_vector(z),
            "x0": encode_vector(x0),
            "y0": encode_vector(y0),
            "pair":[encode_vector(x), encode_vector(y)],
            "sides": sides,
            "checks": checks,
        },
        N=ledger.N,
        ledger_hash=ledger_hash(ledger),
    )
